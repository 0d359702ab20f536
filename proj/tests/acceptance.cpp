// Acceptance criteria 1-11. One PASS/FAIL line per criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "nlch/experiments.hpp"
#include "nlch/parallel.hpp"

using namespace nlch;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
  failures += !o.pass;
}

Grid periodic(int dim, int n) {
  GridSpec s;
  s.dim = dim;
  s.nodes = {n, dim == 2 ? n : 1};
  return Grid::cartesian(s);
}

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(g);
  for (double& v : f.values) v = u(rng);
  return f;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const Potential quartic = Potential::quartic();
const Kernel band1(KernelSpec::band(1, 2, 1, 1));
const Kernel band2(KernelSpec::band(1, 2, 1, 2));

}  // namespace

int main() {
  std::printf("threads: %d\n", thread_count());

  report(1, "gradient vs finite differences", [] {
    const Grid g = periodic(2, 64);
    const EnergyModel model(g, quartic, band2, 0.1);
    std::mt19937_64 rng(101);
    const Field u = random_field(g, rng);
    const auto grad = energy_gradient(u, model);
    // Five-point central differences are exact for the quartic energy up to round-off.
    const double h = 1e-3;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Field d = random_field(g, rng);
      auto e = [&](double t) {
        Field v = u;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += t * d[i];
        return energy_total(v, model).total;
      };
      const double fd = (-e(2 * h) + 8 * e(h) - 8 * e(-h) + e(-2 * h)) / (12 * h);
      double an = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) an += grad[i] * d[i];
      worst = std::max(worst, rel(an, fd));
    }
    return Outcome{worst < 1e-6, fmt("max relative error %.2e over 20 directions (< 1e-6)", worst)};
  });

  report(2, "FFT vs direct path", [] {
    double worst = 0.0;
    std::mt19937_64 rng(202);
    for (int dim : {1, 2}) {
      const Grid g = periodic(dim, dim == 1 ? 1024 : 64);
      const EnergyModel model(g, quartic, dim == 1 ? band1 : band2, dim == 1 ? 0.02 : 0.1);
      const Mask all = full_mask(g);
      for (int k = 0; k < 50; ++k) {
        const Field f = random_field(g, rng);
        worst = std::max(worst, rel(energy_j(f, model, all, all, JPath::direct),
                                    energy_j(f, model, all, all, JPath::fft)));
      }
    }
    return Outcome{worst < 1e-10, fmt("max relative difference %.2e over 50 fields per dimension (< 1e-10)", worst)};
  });

  report(3, "symmetry and additivity of J", [] {
    const Grid g = periodic(2, 64);
    const EnergyModel model(g, quartic, band2, 0.1);
    std::mt19937_64 rng(303);
    double sym = 0.0, add = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Field f = random_field(g, rng);
      Mask a(g.size(), 0), b(g.size(), 0);
      std::uniform_int_distribution<int> pick(0, 2);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const int c = pick(rng);
        a[i] = c == 1;
        b[i] = c == 2;
      }
      const Mask ab = mask_union(a, b);
      const double jab = energy_j(f, model, a, b, JPath::direct);
      sym = std::max(sym, rel(jab, energy_j(f, model, b, a, JPath::direct)));
      const double whole = energy_j(f, model, ab, ab, JPath::direct);
      const double parts = energy_j(f, model, a, a, JPath::direct) + 2 * jab +
                           energy_j(f, model, b, b, JPath::direct);
      add = std::max(add, rel(whole, parts));
    }
    return Outcome{sym < 1e-12 && add < 1e-12,
                   fmt("symmetry %.2e, additivity %.2e over 20 fields (< 1e-12)", sym, add)};
  });

  report(4, "slicing formula by Monte Carlo", [] {
    std::string detail;
    bool ok = true;
    for (auto e : {SliceDomain::square, SliceDomain::disk}) {
      const auto r = slicing_check(e, SliceIntegrand::constant, 1000000, 7);
      const double z = (r.rhs - r.lhs) / r.std_error;
      ok &= std::abs(z) <= 3.0;
      detail += to_string(e) + fmt(": rhs %.5f vs %.5f, %.2f stderr; ", r.rhs, r.lhs, z);
    }
    detail.resize(detail.size() - 2);
    return Outcome{ok, detail + " (<= 3)"};
  });

  // Shared by 5 and 6.
  GammaScanResult single;
  report(5, "1D Gamma-limit consistency", [&] {
    GammaScanConfig cfg;
    cfg.oracle.resolution.nodes_per_eps = 32;
    single = gamma_scan(cfg, quartic, band1);
    bool trend = true;
    std::string rs;
    for (std::size_t i = 0; i < single.rows.size(); ++i) {
      rs += fmt(i ? ", %.6f" : "%.6f", single.rows[i].ratio);
      if (i && std::abs(single.rows[i].ratio - 1) > std::abs(single.rows[i - 1].ratio - 1) + 1e-3) trend = false;
      trend &= single.rows[i].converged;
    }
    const double last = single.rows.back().ratio;
    return Outcome{last >= 0.95 && last <= 1.05 && trend,
                   "psi " + fmt("%.6f", single.psi) + ", ratios at eps 0.2..0.025: " + rs +
                       (trend ? "; distance to 1 nonincreasing" : "; trend violated")};
  });

  report(6, "additivity of transitions", [&] {
    GammaScanConfig cfg;
    cfg.eps = {0.05};
    cfg.transitions = 3;
    cfg.oracle.psi_value = single.psi;
    const auto r = gamma_scan(cfg, quartic, band1);
    double e1 = 0.0;
    for (const auto& row : single.rows)
      if (row.epsilon == 0.05) e1 = row.energy;
    const double ratio = r.rows[0].energy / (3 * e1);
    const bool ok = std::abs(ratio - 1) <= 0.07 && r.rows[0].transitions == 3 && !r.rows[0].crowded;
    return Outcome{ok, fmt("E_3 %.5f, 3 E_1 %.5f, ratio %.6f (within 7%%)", r.rows[0].energy, 3 * e1, ratio)};
  });

  report(7, "isotropy of psi for the radial band kernel", [] {
    const std::vector<LatticeDirection> dirs{{1, 0}, {0, 1}, {1, 1}, {1, 2}};
    PsiOptions po;
    po.eps_grid = {0.05, 0.1, 0.2, 0.4};
    po.refine = 2;
    std::string detail;
    double spread = 0.0;
    for (double npe : {8.0, 16.0}) {
      CellResolution res;
      res.nodes_per_eps = npe;
      const auto rows = anisotropy_table(dirs, quartic, band2, po, res, SolverConfig{});
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& r : rows) {
        lo = std::min(lo, r.psi);
        hi = std::max(hi, r.psi);
      }
      spread = (hi - lo) / lo;
      detail += fmt("%g nodes/eps: psi in [%.5f, %.5f], spread %.3f%%; ", npe, lo, hi, 100 * spread);
    }
    detail.resize(detail.size() - 2);
    return Outcome{spread <= 0.02, detail + " (<= 2%)"};
  });

  report(8, "recovery upper bound on a flat interface", [] {
    const auto r = limsup_check(LimsupConfig{}, quartic, band2);
    const auto& last = r.rows.back();
    std::string rs;
    for (const auto& row : r.rows) rs += fmt("%.4f:%.5f ", row.epsilon, row.ratio_optimal);
    return Outcome{std::abs(last.ratio_optimal - 1) <= 0.1,
                   fmt("eps* %.5f, F/(psi L) %.6f (within 10%%); ", r.eps_star, last.ratio_optimal) +
                       "eps:ratio " + rs.substr(0, rs.size() - 1)};
  });

  report(9, "interpolation constant", [] {
    bool ok = true;
    std::string detail;
    for (int dim : {1, 2}) {
      InterpConfig cfg;
      if (dim == 2) cfg.nodes = 128;
      const auto r = interpolation_check(cfg, quartic, dim == 1 ? band1 : band2);
      const bool pass = std::isfinite(r.calibrated) && r.spread <= 0.2 && r.violations == 0;
      ok &= pass;
      detail += fmt("n=%g: C %.4f, spread %.1f%%, held-out max %.4f, ", dim, r.calibrated, 100 * r.spread,
                    r.held_out_max) +
                std::to_string(r.violations) + " violations; ";
    }
    detail.resize(detail.size() - 2);
    return Outcome{ok, detail};
  });

  report(10, "compactness: transition counts", [] {
    CompactConfig cfg;
    cfg.oracle.resolution.nodes_per_eps = 32;
    const auto r = compactness_diagnostic(cfg, quartic, band1);
    bool pinned_ok = true;
    int pinned = 0;
    for (const auto& row : r.rows)
      if (row.family.find("pinned") != std::string::npos) {
        ++pinned;
        pinned_ok &= row.count <= row.bound;
      }
    return Outcome{pinned_ok && r.counts_bounded,
                   std::to_string(pinned) + " pinned rows within k, all rows within bound: " +
                       (r.counts_bounded ? "yes" : "no") + ", monotone in eps: " +
                       (r.counts_monotone ? "yes" : "no")};
  });

  report(11, "Gagliardo moments", [] {
    double worst = 0.0;
    for (int i = 0; i < 9; ++i) {
      const double s = 0.55 + 0.05 * i;
      const double exact = 2 * (1 / (2 - 2 * s) + 1 / (2 * s - 1));
      worst = std::max(worst, rel(Kernel(KernelSpec::gagliardo(s, 1)).moment(), exact));
    }
    return Outcome{worst < 1e-6, fmt("max relative error %.2e for s = 0.55..0.95 (< 1e-6)", worst)};
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures ? 1 : 0;
}
