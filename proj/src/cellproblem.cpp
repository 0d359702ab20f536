#include "nlch/cellproblem.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "nlch/errors.hpp"
#include "nlch/parallel.hpp"

namespace nlch {

Vec2 LatticeDirection::unit() const {
  const double len = std::hypot(static_cast<double>(p), static_cast<double>(q));
  if (len == 0.0) throw ParameterError("lattice direction must be nonzero");
  return {p / len, q / len};
}

namespace {

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

double normal_spacing(const Grid& g) { return g.is_skew() ? g.skew()->normal_spacing : g.spacing(0); }

}  // namespace

CellProblem::CellProblem(const Potential& potential, const Kernel& kernel, LatticeDirection dir,
                         double epsilon, const CellResolution& res)
    : dir_(dir) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("cell problem needs 0 < epsilon < 1");
  if (!(res.nodes_per_eps >= 1.0)) throw ParameterError("nodes_per_eps must be >= 1");
  if (res.margin_cells < 1) throw ParameterError("margin_cells must be >= 1");
  if (!(res.max_reach > 0.0)) throw ParameterError("max_reach must be > 0");
  const int n = kernel.dim();
  StencilOptions sopts;
  sopts.mass_tol = res.mass_tol;
  sopts.max_radius = res.max_reach;

  if (n == 1) {
    if (dir.q != 0 || std::abs(dir.p) != 1) throw ParameterError("1D cell direction must be +1 or -1");
    const double h = epsilon / res.nodes_per_eps;
    auto st = discrete_stencil(kernel, epsilon, {h, h}, sopts);
    halfwidth_ = 0.5 + st.truncation_radius + res.margin_cells * h;
    period_ = 1.0;
    model_ = std::make_unique<EnergyModel>(Grid::line(h, halfwidth_), potential, kernel, std::move(st));
  } else {
    if (std::gcd(dir.p, dir.q) != 1) throw ParameterError("cell direction (p,q) must have gcd 1");
    const double len = std::hypot(static_cast<double>(dir.p), static_cast<double>(dir.q));
    int m = res.tangential_nodes;
    double period = 1.0;
    if (m == 0) {
      m = std::max(2, static_cast<int>(std::ceil(res.nodes_per_eps / (epsilon * len) - 1e-9)));
    } else {
      if (m < 2) throw ParameterError("tangential_nodes must be 0 or >= 2");
      const int j = std::max(1, static_cast<int>(std::ceil(res.nodes_per_eps / (epsilon * m * len) - 1e-9)));
      period = 1.0 / j;
    }
    const double h = period / (m * len);
    auto st = discrete_stencil(kernel, epsilon, {h, h}, sopts);
    halfwidth_ = 0.5 + st.truncation_radius + res.margin_cells * h / len;
    period_ = period;
    model_ = std::make_unique<EnergyModel>(Grid::skew_strip(dir.p, dir.q, m, halfwidth_, period),
                                           potential, kernel, std::move(st));
  }
  constraint_ = ConstraintSpec::profile(dir.unit(), 0.5);
}

Field CellProblem::initial_profile() const {
  const Vec2 nu = normal();
  const double eps = epsilon();
  Field f = Field::from_function(grid(), [&](const Vec2& x) { return std::tanh(dot(x, nu) / eps); });
  return project_constraints(f, constraint_);
}

bool CellProblem::narrow(const Field& v) const {
  const Vec2 nu = normal();
  const double hn = normal_spacing(grid());
  const double tol = 1e-9 * hn;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = dot(grid().position(i), nu);
    const double ad = std::abs(d);
    if (ad >= 0.5 - tol || ad < 0.5 - hn - tol) continue;
    if (std::abs(v.values[i] - (d > 0 ? 1.0 : -1.0)) > 1e-3) return true;
  }
  return false;
}

CellEnergy CellProblem::energy(const Field& v) const {
  if (!(v.grid == grid())) throw ParameterError("field is not on the cell grid");
  check_constraints(v, constraint_);
  CellEnergy out;
  out.value = energy_total(v, *model_).total / period_;
  out.narrow_strip = narrow(v);
  return out;
}

ProfileSolution solve_profile(const CellProblem& cell, const SolverConfig& cfg) {
  auto r = minimize(cell.initial_profile(), cell.model(), cell.constraint(), cfg);
  ProfileSolution out{std::move(r.field), r.report.total / cell.tangential_period(), r.converged,
                      false, r.iterations, r.stop_reason};
  out.narrow_strip = cell.narrow(out.profile);
  return out;
}

ProfileSolution solve_profile(LatticeDirection dir, double epsilon, const Potential& p,
                              const Kernel& k, const CellResolution& res,
                              const SolverConfig& cfg) {
  return solve_profile(CellProblem(p, k, dir, epsilon, res), cfg);
}

std::vector<double> default_eps_grid() {
  std::vector<double> out(8);
  const double lo = std::log(0.02), hi = std::log(0.5);
  for (int i = 0; i < 8; ++i) out[i] = std::exp(lo + (hi - lo) * i / 7.0);
  out.front() = 0.02;
  out.back() = 0.5;
  return out;
}

namespace {

struct SweepEntry {
  double eps = 0.0;
  ProfileSolution sol;
  double halfwidth = 0.0;
  double period = 1.0;
};

std::vector<SweepEntry> sweep(const std::vector<double>& eps, LatticeDirection dir,
                              const Potential& p, const Kernel& k, const CellResolution& res,
                              const SolverConfig& cfg) {
  std::vector<std::optional<SweepEntry>> slots(eps.size());
  parallel_tasks(eps.size(), [&](std::size_t i) {
    CellProblem cell(p, k, dir, eps[i], res);
    slots[i] = SweepEntry{eps[i], solve_profile(cell, cfg), cell.halfwidth(), cell.tangential_period()};
  });
  std::vector<SweepEntry> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::size_t argmin(const std::vector<SweepEntry>& e) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i].sol.energy < e[best].sol.energy) best = i;
  return best;
}

}  // namespace

PsiResult psi(LatticeDirection dir, const Potential& p, const Kernel& k, const PsiOptions& opts,
              const CellResolution& res, const SolverConfig& cfg) {
  std::vector<double> grid = opts.eps_grid.empty() ? default_eps_grid() : opts.eps_grid;
  for (double e : grid)
    if (!(e > 0.0 && e < 1.0)) throw ParameterError("eps_grid values must lie in (0, 1)");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw ParameterError("eps_grid is empty");

  auto entries = sweep(grid, dir, p, k, res, cfg);
  if (opts.refine > 0 && entries.size() > 1) {
    const std::size_t i = argmin(entries);
    const double lo = entries[i == 0 ? 0 : i - 1].eps;
    const double hi = entries[std::min(i + 1, entries.size() - 1)].eps;
    std::vector<double> extra;
    for (int r = 1; r <= opts.refine; ++r)
      extra.push_back(lo * std::pow(hi / lo, static_cast<double>(r) / (opts.refine + 1)));
    auto more = sweep(extra, dir, p, k, res, cfg);
    for (auto& m : more) entries.push_back(std::move(m));
    std::sort(entries.begin(), entries.end(),
              [](const SweepEntry& a, const SweepEntry& b) { return a.eps < b.eps; });
  }

  const bool any = std::any_of(entries.begin(), entries.end(),
                               [](const SweepEntry& e) { return e.sol.converged; });
  if (!any) throw NumericalError("no cell problem in the epsilon sweep converged");

  PsiResult out;
  out.direction = dir;
  out.nu = dir.unit();
  for (const auto& e : entries) {
    out.eps_grid.push_back(e.eps);
    out.energies.push_back(e.sol.energy);
    out.converged.push_back(e.sol.converged);
    out.narrow.push_back(e.sol.narrow_strip);
  }
  const std::size_t best = argmin(entries);
  out.psi = entries[best].sol.energy;
  out.argmin_eps = entries[best].eps;
  out.profile = std::move(entries[best].sol.profile);
  out.strip_halfwidth = entries[best].halfwidth;
  out.tangential_period = entries[best].period;
  return out;
}

std::string psi_csv(const PsiResult& r) {
  std::ostringstream os;
  os << std::setprecision(15);
  os << "nu_x,nu_y,epsilon,cell_energy,converged\n";
  for (std::size_t i = 0; i < r.eps_grid.size(); ++i)
    os << r.nu[0] << ',' << r.nu[1] << ',' << r.eps_grid[i] << ',' << r.energies[i] << ','
       << (r.converged[i] ? 1 : 0) << '\n';
  const auto it = std::find(r.eps_grid.begin(), r.eps_grid.end(), r.argmin_eps);
  const bool conv = it != r.eps_grid.end() && r.converged[it - r.eps_grid.begin()];
  os << r.nu[0] << ',' << r.nu[1] << ",min," << r.psi << ',' << (conv ? 1 : 0) << '\n';
  return os.str();
}

std::vector<PsiResult> anisotropy_table(const std::vector<LatticeDirection>& dirs,
                                        const Potential& p, const Kernel& k,
                                        const PsiOptions& opts, const CellResolution& res,
                                        const SolverConfig& cfg) {
  if (k.dim() != 2) throw ParameterError("anisotropy_table requires a 2D kernel");
  std::vector<PsiResult> out;
  for (const auto& d : dirs) out.push_back(psi(d, p, k, opts, res, cfg));
  return out;
}

std::string anisotropy_csv(const std::vector<PsiResult>& rows) {
  std::ostringstream os;
  os << std::setprecision(15);
  os << "nu_x,nu_y,p,q,psi\n";
  for (const auto& r : rows)
    os << r.nu[0] << ',' << r.nu[1] << ',' << r.direction.p << ',' << r.direction.q << ','
       << r.psi << '\n';
  return os.str();
}

}  // namespace nlch
