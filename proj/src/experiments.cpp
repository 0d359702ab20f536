#include "nlch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "nlch/cubature.hpp"
#include "nlch/errors.hpp"
#include "nlch/interface.hpp"
#include "nlch/parallel.hpp"

namespace nlch {

namespace {

constexpr double kPi = std::numbers::pi;

Grid fixed_line(int nodes, double lo, double hi) {
  GridSpec s;
  s.dim = 1;
  s.nodes = {nodes, 1};
  s.extent = {hi - lo, 1.0};
  s.origin = {lo, 0.0};
  s.boundary = {Boundary::fixed, Boundary::fixed};
  return Grid::cartesian(s);
}

// Unit square, x fixed with spacing 1/n, y periodic with n nodes.
Grid unit_strip_box(int n) {
  GridSpec s;
  s.dim = 2;
  s.nodes = {n + 1, n};
  s.extent = {1.0, 1.0};
  s.boundary = {Boundary::fixed, Boundary::periodic};
  return Grid::cartesian(s);
}

double gamma_of(const Kernel& k) {
  return nondegeneracy_constants(k, default_directions(k.dim())).gamma_J;
}

// Largest transition count over the rows of constant y (the whole line in 1D).
int max_row_transitions(const Field& f) {
  const auto& sh = f.grid.shape();
  int best = 0;
  std::vector<double> row(sh[0]);
  for (int j = 0; j < sh[1]; ++j) {
    for (int i = 0; i < sh[0]; ++i) row[i] = f.values[f.grid.index(i, j)];
    best = std::max(best, count_transitions(row));
  }
  return best;
}

struct Slab {
  double lo, hi, value;
};

std::vector<Slab> pin_slabs(int k, double lo, double hi, double width) {
  if (k < 1) throw ParameterError("number of transitions must be >= 1");
  if (!(hi > lo)) throw ParameterError("transition interval must have hi > lo");
  if (!(width > 0.0)) throw ParameterError("pin width must be > 0");
  const double step = (hi - lo) / k;
  std::vector<Slab> out;
  for (int i = 0; i <= k; ++i) {
    const double c = lo + i * step;
    const double v = i % 2 == 0 ? -1.0 : 1.0;
    if (i == 0)
      out.push_back({lo - 1.0, lo + width, v});
    else if (i == k)
      out.push_back({hi - width, hi + 1.0, v});
    else
      out.push_back({c - 0.5 * width, c + 0.5 * width, v});
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(15) << v;
  return os.str();
}

}  // namespace

PsiResult oracle_psi(const Potential& p, const Kernel& k, const OracleConfig& oc,
                     const SolverConfig& cfg) {
  if (oc.psi_value) {
    if (!(*oc.psi_value > 0.0)) throw ParameterError("psi value must be > 0");
    PsiResult r;
    r.psi = *oc.psi_value;
    return r;
  }
  return psi({1, 0}, p, k, oc.psi, oc.resolution, cfg);
}

ConstraintSpec transition_pins(int k, double lo, double hi, double width) {
  ConstraintSpec c;
  for (const auto& s : pin_slabs(k, lo, hi, width)) c.pins.push_back({{1.0, 0.0}, s.lo, s.hi, s.value});
  return c;
}

double pin_separation(int k, double lo, double hi, double width) {
  const auto s = pin_slabs(k, lo, hi, width);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < s.size(); ++i) gap = std::min(gap, s[i].lo - s[i - 1].hi);
  return gap;
}

Field transition_guess(const Grid& g, int k, double lo, double hi, double width, double epsilon) {
  // Centre each transition in its gap; by reflection symmetry that is stationary.
  const auto s = pin_slabs(k, lo, hi, width);
  std::vector<double> mid;
  for (std::size_t i = 1; i < s.size(); ++i) mid.push_back(0.5 * (s[i - 1].hi + s[i].lo));
  return Field::from_function(g, [&](const Vec2& x) {
    double v = -1.0;
    for (double m : mid) v *= std::tanh((m - x[0]) / epsilon);
    return v;
  });
}

GammaScanResult gamma_scan(const GammaScanConfig& cfg, const Potential& p, const Kernel& k) {
  if (cfg.dim != k.dim()) throw ParameterError("gamma scan dimension does not match the kernel");
  if (cfg.eps.empty()) throw ParameterError("gamma scan needs at least one epsilon");
  if (cfg.nodes < 8) throw ParameterError("gamma scan needs at least 8 nodes");
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw ParameterError("epsilon must be > 0");
  GammaScanResult out;
  out.psi = oracle_psi(p, k, cfg.oracle, cfg.solver).psi;
  out.gamma_J = gamma_of(k);
  const double lo = cfg.dim == 1 ? -cfg.halfwidth : 0.0;
  const double hi = cfg.dim == 1 ? cfg.halfwidth : 1.0;
  const Grid grid = cfg.dim == 1 ? fixed_line(cfg.nodes, lo, hi) : unit_strip_box(cfg.nodes);
  const auto cons = transition_pins(cfg.transitions, lo, hi, cfg.pin_width);
  const double sep = pin_separation(cfg.transitions, lo, hi, cfg.pin_width);

  out.rows.resize(cfg.eps.size());
  std::vector<std::optional<Field>> fields(cfg.eps.size());
  parallel_tasks(cfg.eps.size(), [&](std::size_t i) {
    GammaRow& row = out.rows[i];
    row.epsilon = cfg.eps[i];
    row.predicted = cfg.transitions * out.psi;
    row.crowded = sep < 10.0 * row.epsilon * out.gamma_J;
    try {
      EnergyModel m(grid, p, k, row.epsilon);
      const Field f0 =
          project_constraints(transition_guess(grid, cfg.transitions, lo, hi, cfg.pin_width, row.epsilon), cons);
      auto r = minimize(f0, m, cons, cfg.solver);
      row.energy = r.report.total;
      row.ratio = row.energy / row.predicted;
      row.converged = r.converged;
      row.iterations = r.iterations;
      row.transitions = max_row_transitions(r.field);
      row.status = r.stop_reason;
      fields[i] = std::move(r.field);
    } catch (const std::exception& e) {
      row.energy = row.ratio = std::numeric_limits<double>::quiet_NaN();
      row.status = e.what();
    }
    if (row.crowded) row.status += "; pins closer than 10 eps gamma_J";
  });
  for (auto& f : fields)
    if (f) out.minimizers.push_back(std::move(*f));
  return out;
}

std::string gamma_csv(const GammaScanResult& r) {
  std::ostringstream os;
  os << "epsilon,energy,predicted,ratio,transitions,converged,iterations,status\n";
  for (const auto& x : r.rows) {
    std::string st = x.status;
    std::replace(st.begin(), st.end(), ',', ';');
    os << fmt(x.epsilon) << ',' << fmt(x.energy) << ',' << fmt(x.predicted) << ',' << fmt(x.ratio) << ','
       << x.transitions << ',' << (x.converged ? 1 : 0) << ',' << x.iterations << ',' << st << '\n';
  }
  return os.str();
}

SliceDomain parse_slice_domain(const std::string& s) {
  if (s == "interval") return SliceDomain::interval;
  if (s == "square") return SliceDomain::square;
  if (s == "disk") return SliceDomain::disk;
  throw ParameterError("unknown slice domain '" + s + "' (interval, square, disk)");
}

SliceIntegrand parse_slice_integrand(const std::string& s) {
  if (s == "constant") return SliceIntegrand::constant;
  if (s == "gaussian") return SliceIntegrand::gaussian;
  if (s == "separable") return SliceIntegrand::separable;
  throw ParameterError("unknown slice integrand '" + s + "' (constant, gaussian, separable)");
}

std::string to_string(SliceDomain d) {
  switch (d) {
    case SliceDomain::interval: return "interval";
    case SliceDomain::square: return "square";
    case SliceDomain::disk: return "disk";
  }
  return "?";
}

std::string to_string(SliceIntegrand g) {
  switch (g) {
    case SliceIntegrand::constant: return "constant";
    case SliceIntegrand::gaussian: return "gaussian";
    case SliceIntegrand::separable: return "separable";
  }
  return "?";
}

namespace {

struct QuadPoint {
  Vec2 x;
  double w;
};

template <unsigned N>
std::vector<std::pair<double, double>> gl_nodes(double a, double b) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& abs = G::abscissa();
  const auto& wts = G::weights();
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < abs.size(); ++i) {
    if (abs[i] == 0.0) {
      out.push_back({c, r * wts[i]});
    } else {
      out.push_back({c - r * abs[i], r * wts[i]});
      out.push_back({c + r * abs[i], r * wts[i]});
    }
  }
  return out;
}

std::vector<QuadPoint> domain_rule(SliceDomain e) {
  std::vector<QuadPoint> out;
  if (e == SliceDomain::interval) {
    for (auto [x, w] : gl_nodes<20>(0.0, 1.0)) out.push_back({{x, 0.0}, w});
  } else if (e == SliceDomain::square) {
    const auto g = gl_nodes<20>(0.0, 1.0);
    for (auto [x, wx] : g)
      for (auto [y, wy] : g) out.push_back({{x, y}, wx * wy});
  } else {
    const int m = 64;
    for (auto [r, wr] : gl_nodes<24>(0.0, 1.0))
      for (int i = 0; i < m; ++i) {
        const double th = 2.0 * kPi * i / m;
        out.push_back({{r * std::cos(th), r * std::sin(th)}, wr * r * 2.0 * kPi / m});
      }
  }
  return out;
}

double integrand(SliceIntegrand g, const Vec2& x, const Vec2& y) {
  switch (g) {
    case SliceIntegrand::constant: return 1.0;
    case SliceIntegrand::gaussian: {
      const double dx = x[0] - y[0], dy = x[1] - y[1];
      return std::exp(-(dx * dx + dy * dy));
    }
    case SliceIntegrand::separable: {
      auto f = [](const Vec2& p) { return std::cos(p[0]) + p[1] * p[1]; };
      return f(x) * f(y);
    }
  }
  return 0.0;
}

// Parameter interval of {z + tξ} inside E; false if the line misses E.
bool chord(SliceDomain e, const Vec2& z, const Vec2& xi, double& s0, double& s1) {
  if (e == SliceDomain::disk) {
    const double r2 = 1.0 - (z[0] * z[0] + z[1] * z[1]);
    if (r2 <= 0.0) return false;
    s1 = std::sqrt(r2);
    s0 = -s1;
    return true;
  }
  const int n = e == SliceDomain::interval ? 1 : 2;
  s0 = -std::numeric_limits<double>::infinity();
  s1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    if (xi[a] == 0.0) {
      if (z[a] <= 0.0 || z[a] >= 1.0) return false;
      continue;
    }
    double t0 = -z[a] / xi[a], t1 = (1.0 - z[a]) / xi[a];
    if (t0 > t1) std::swap(t0, t1);
    s0 = std::max(s0, t0);
    s1 = std::min(s1, t1);
  }
  return s1 > s0;
}

// ∬_{[s0,s1]²} g(z+sξ, z+tξ)|t-s|^{n-1} ds dt, folded onto t = s + u, u >= 0.
double chord_integral(SliceIntegrand g, int n, const Vec2& z, const Vec2& xi, double s0, double s1) {
  using G = boost::math::quadrature::gauss<double, 10>;
  const double len = s1 - s0;
  auto at = [&](double s) { return Vec2{z[0] + s * xi[0], z[1] + s * xi[1]}; };
  const double outer = G::integrate(
      [&](double u) {
        const double inner =
            G::integrate([&](double s) { return integrand(g, at(s), at(s + u)); }, s0, s1 - u);
        return (n == 1 ? 1.0 : u) * inner;
      },
      0.0, len);
  return 2.0 * outer;
}

}  // namespace

SliceResult slicing_check(SliceDomain e, SliceIntegrand g, std::size_t samples, std::uint64_t seed) {
  SliceResult out;
  const auto rule = domain_rule(e);
  {
    std::vector<double> terms;
    terms.reserve(rule.size() * rule.size());
    for (const auto& a : rule)
      for (const auto& b : rule) terms.push_back(a.w * b.w * integrand(g, a.x, b.x));
    out.lhs = pairwise_sum(terms);
  }

  if (e == SliceDomain::interval) {
    // S^0 = {±1} and Π^ξ = {0}: the right side is a finite sum.
    double acc = 0.0;
    for (double sgn : {1.0, -1.0}) {
      double s0, s1;
      chord(e, {0.0, 0.0}, {sgn, 0.0}, s0, s1);
      acc += chord_integral(g, 1, {0.0, 0.0}, {sgn, 0.0}, s0, s1);
    }
    out.rhs = 0.5 * acc;
    out.samples = 0;
    return out;
  }

  if (samples < 2) throw ParameterError("slice check needs at least 2 samples");
  // z = τ ξ⊥ with τ uniform on the projection of E onto ξ⊥.
  auto projection = [&](const Vec2& perp, double& lo, double& hi) {
    if (e == SliceDomain::disk) {
      lo = -1.0;
      hi = 1.0;
      return;
    }
    lo = std::min(0.0, perp[0]) + std::min(0.0, perp[1]);
    hi = std::max(0.0, perp[0]) + std::max(0.0, perp[1]);
  };
  const std::size_t block = 1 << 16;
  const std::size_t nblocks = (samples + block - 1) / block;
  std::vector<double> sum(nblocks), sum2(nblocks);
  std::vector<std::size_t> miss(nblocks);
  parallel_tasks(nblocks, [&](std::size_t b) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(ss);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t count = std::min(block, samples - b * block);
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) {
      Vec2 xi{normal(rng), normal(rng)};
      const double nrm = std::hypot(xi[0], xi[1]);
      xi = {xi[0] / nrm, xi[1] / nrm};
      const Vec2 perp{-xi[1], xi[0]};
      double lo, hi;
      projection(perp, lo, hi);
      const double tau = lo + (hi - lo) * unif(rng);
      const Vec2 z{tau * perp[0], tau * perp[1]};
      double s0, s1;
      if (!chord(e, z, xi, s0, s1)) {
        ++miss[b];
        xs[i] = 0.0;
        continue;
      }
      // (1/2) |S^1| (hi - lo) I
      xs[i] = kPi * (hi - lo) * chord_integral(g, 2, z, xi, s0, s1);
    }
    sum[b] = pairwise_sum(xs);
    for (auto& x : xs) x *= x;
    sum2[b] = pairwise_sum(xs);
  });
  const double n = static_cast<double>(samples);
  const double mean = pairwise_sum(sum) / n;
  const double var = std::max(0.0, (pairwise_sum(sum2) - n * mean * mean) / (n - 1.0));
  out.rhs = mean;
  out.std_error = std::sqrt(var / n);
  out.samples = samples;
  for (auto m : miss) out.misses += m;
  return out;
}

std::string slice_csv(SliceDomain e, SliceIntegrand g, std::uint64_t seed, const SliceResult& r) {
  std::ostringstream os;
  os << "domain,integrand,samples,seed,lhs,rhs,stderr,misses\n";
  os << to_string(e) << ',' << to_string(g) << ',' << r.samples << ',' << seed << ',' << fmt(r.lhs)
     << ',' << fmt(r.rhs) << ',' << fmt(r.std_error) << ',' << r.misses << '\n';
  return os.str();
}

InterpRow interpolation_ratio(const Field& u, const EnergyModel& model, double gamma_J) {
  const Grid& g = u.grid;
  const int n = g.dim();
  const double eps = model.epsilon();
  const double r = 2.0 * eps * gamma_J;
  auto dist_to_a = [&](const Vec2& x) {
    double d2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d = std::max(0.0, std::abs(x[a] - 0.5) - 0.2);
      d2 += d * d;
    }
    return std::sqrt(d2);
  };
  const Mask a = mask_where(g, [&](const Vec2& x) {
    for (int ax = 0; ax < n; ++ax)
      if (!(x[ax] > 0.3 && x[ax] < 0.7)) return false;
    return true;
  });
  const Mask b = mask_where(g, [&](const Vec2& x) { return dist_to_a(x) < r; });

  const auto grad = gradient(u);
  std::vector<double> terms;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!a[i]) continue;
    double s = 0.0;
    for (int ax = 0; ax < n; ++ax) s += grad.components[ax][i] * grad.components[ax][i];
    terms.push_back(g.quad_weight(i) * s);
  }
  InterpRow row;
  row.lhs = eps * pairwise_sum(terms);
  row.rhs = energy_total(u, model, b, "enlarged").total;
  if (row.lhs == 0.0 && row.rhs == 0.0) {
    row.skipped = true;
    row.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    row.ratio = row.lhs / row.rhs;
  }
  return row;
}

std::vector<std::pair<std::string, Field>> random_suite(const Grid& g, double epsilon, int count,
                                                        std::uint64_t seed) {
  const int n = g.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  struct Mode {
    std::array<int, 2> k;
    double c, phase;
  };
  // Random periodic trigonometric polynomial with wavenumbers |k_a| <= kmax.
  auto poly = [&](int kmax, int modes) {
    std::vector<Mode> out;
    for (int m = 0; m < modes; ++m) {
      Mode md;
      md.k = {static_cast<int>(std::floor(U(rng) * (2 * kmax + 1))) - kmax,
              n == 2 ? static_cast<int>(std::floor(U(rng) * (2 * kmax + 1))) - kmax : 0};
      if (md.k[0] == 0 && md.k[1] == 0) md.k[0] = 1;
      md.c = 2.0 * U(rng) - 1.0;
      md.phase = 2.0 * kPi * U(rng);
      out.push_back(md);
    }
    return out;
  };
  auto eval = [&](const std::vector<Mode>& ms, const Vec2& x) {
    double v = 0.0;
    for (const auto& m : ms) v += m.c * std::cos(2.0 * kPi * (m.k[0] * x[0] + m.k[1] * x[1]) + m.phase);
    return v;
  };
  auto rms_grad = [&](const std::vector<Mode>& ms) {
    double s = 0.0;
    for (const auto& m : ms)
      s += 0.5 * m.c * m.c * 4.0 * kPi * kPi * (m.k[0] * m.k[0] + m.k[1] * m.k[1]);
    return std::sqrt(std::max(s, 1e-300));
  };
  const double h = g.spacing(0);
  const int kmax_noise = std::max(1, static_cast<int>(1.0 / (8.0 * h)));

  std::vector<std::pair<std::string, Field>> out;
  for (int i = 0; i < count; ++i) {
    const int kind = i % 4;
    const auto phi = poly(1 + static_cast<int>(U(rng) * 4), 1 + static_cast<int>(U(rng) * 4));
    const auto noise = poly(1 + static_cast<int>(U(rng) * kmax_noise), 4 + static_cast<int>(U(rng) * 12));
    // Interface widths from ε/4 to 4ε; noise amplitudes up to 0.3.
    const double w = epsilon * std::pow(16.0, U(rng)) / 4.0;
    const double amp = 0.3 * U(rng);
    const double sign = U(rng) < 0.5 ? -1.0 : 1.0;
    const double gphi = rms_grad(phi), gnoise = std::max(1.0, rms_grad(noise) / 10.0);
    std::string name;
    std::function<double(const Vec2&)> f;
    switch (kind) {
      case 0:
        name = "interfaces";
        f = [&, w, gphi](const Vec2& x) { return std::tanh(eval(phi, x) / (w * gphi)); };
        break;
      case 1:
        name = "noise";
        f = [&, amp, sign, gnoise](const Vec2& x) { return sign + amp * eval(noise, x) / gnoise; };
        break;
      case 2:
        name = "mixed";
        f = [&, w, gphi, amp, gnoise](const Vec2& x) {
          return std::tanh(eval(phi, x) / (w * gphi)) + amp * eval(noise, x) / gnoise;
        };
        break;
      default:
        name = "smooth";
        f = [&, amp](const Vec2& x) { return (0.5 + 2.0 * amp) * eval(phi, x); };
        break;
    }
    out.emplace_back(name, Field::from_function(g, f));
  }
  return out;
}

InterpResult interpolation_check(const InterpConfig& cfg, const Potential& p, const Kernel& k) {
  if (cfg.fields < 1) throw ParameterError("interpolation check needs at least one field");
  if (cfg.seeds.size() < 2) throw ParameterError("interpolation check needs two calibration seeds");
  if (!(cfg.epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  const int n = k.dim();
  GridSpec s;
  s.dim = n;
  s.nodes = {cfg.nodes, n == 2 ? cfg.nodes : 1};
  const Grid g = Grid::cartesian(s);
  const EnergyModel model(g, p, k, cfg.epsilon);
  const double gamma_J = gamma_of(k);
  const double r = 2.0 * cfg.epsilon * gamma_J;
  // The enlarged box must not see itself across the periodic boundary.
  if (0.6 - 2.0 * r <= model.stencil().truncation_radius)
    throw ParameterError("epsilon too large: the enlarged region wraps around the periodic cell");

  InterpResult out;
  auto run_suite = [&](std::uint64_t seed) {
    double mx = 0.0;
    const auto suite = random_suite(g, cfg.epsilon, cfg.fields, seed);
    for (std::size_t i = 0; i < suite.size(); ++i) {
      InterpRow row = interpolation_ratio(suite[i].second, model, gamma_J);
      row.seed = seed;
      row.index = static_cast<int>(i);
      row.kind = suite[i].first;
      if (!row.skipped) mx = std::max(mx, row.ratio);
      out.rows.push_back(row);
    }
    return mx;
  };
  for (auto seed : cfg.seeds) out.suite_max.push_back(run_suite(seed));
  out.calibrated = *std::max_element(out.suite_max.begin(), out.suite_max.end());
  const double mn = *std::min_element(out.suite_max.begin(), out.suite_max.end());
  out.spread = (out.calibrated - mn) / mn;
  const std::size_t held_from = out.rows.size();
  out.held_out_max = run_suite(cfg.held_out_seed);
  for (std::size_t i = held_from; i < out.rows.size(); ++i)
    if (!out.rows[i].skipped && out.rows[i].ratio > out.calibrated) ++out.violations;
  for (const auto& row : out.rows)
    if (!row.skipped && (out.worst.kind.empty() || row.ratio > out.worst.ratio)) out.worst = row;
  return out;
}

std::string interp_csv(const InterpResult& r) {
  std::ostringstream os;
  os << "seed,index,kind,lhs,rhs,ratio\n";
  for (const auto& x : r.rows)
    os << x.seed << ',' << x.index << ',' << x.kind << ',' << fmt(x.lhs) << ',' << fmt(x.rhs) << ','
       << (x.skipped ? std::string("nan") : fmt(x.ratio)) << '\n';
  return os.str();
}

CompactResult compactness_diagnostic(const CompactConfig& cfg, const Potential& p, const Kernel& k) {
  if (k.dim() != 1) throw ParameterError("compactness diagnostic is one-dimensional");
  if (cfg.eps.empty()) throw ParameterError("compactness diagnostic needs epsilon values");
  CompactResult out;
  out.psi = oracle_psi(p, k, cfg.oracle, cfg.solver).psi;
  const double L = cfg.halfwidth;
  const Grid grid = fixed_line(cfg.nodes, -L, L);
  std::vector<double> eps = cfg.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());

  struct Job {
    std::string family;
    int k = 0;            // pinned transitions, 0 for random starts
    std::uint64_t seed = 0;
    double epsilon = 0.0;
  };
  std::vector<Job> jobs;
  for (int kk : cfg.pinned)
    for (double e : eps) jobs.push_back({"pinned k=" + std::to_string(kk), kk, 0, e});
  for (int r = 0; r < cfg.random_fields; ++r)
    for (double e : eps)
      jobs.push_back({"random seed=" + std::to_string(cfg.seed + r), 0, cfg.seed + r, e});

  out.rows.resize(jobs.size());
  parallel_tasks(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    CompactRow& row = out.rows[j];
    row.family = job.family;
    row.epsilon = job.epsilon;
    EnergyModel m(grid, p, k, job.epsilon);
    ConstraintSpec cons;
    Field f0(grid);
    if (job.k > 0) {
      cons = transition_pins(job.k, -L, L, cfg.pin_width);
      f0 = project_constraints(transition_guess(grid, job.k, -L, L, cfg.pin_width, job.epsilon), cons);
      row.bound = job.k;
    } else {
      // Random smooth sign pattern, the same for every ε of the family.
      std::mt19937_64 rng(job.seed);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      std::vector<std::array<double, 3>> modes(6);
      for (int i = 0; i < 6; ++i) modes[i] = {U(rng), static_cast<double>(i + 1), kPi * U(rng)};
      f0 = Field::from_function(grid, [&](const Vec2& x) {
        double v = 0.0;
        for (const auto& md : modes) v += md[0] * std::cos(md[1] * kPi * x[0] / (2.0 * L) + md[2]);
        return std::tanh(v / job.epsilon);
      });
      row.bound = count_transitions(f0.values);
    }
    auto r = minimize(f0, m, cons, cfg.solver);
    row.energy = r.report.total;
    row.count = count_transitions(r.field.values);
    row.converged = r.converged;
    row.predicted = row.count * out.psi;
    row.ratio = row.predicted > 0.0 ? row.energy / row.predicted : std::numeric_limits<double>::quiet_NaN();
  });

  for (std::size_t j = 0; j < out.rows.size(); ++j) {
    const auto& row = out.rows[j];
    if (row.count > row.bound) out.counts_bounded = false;
    if (row.converged && row.count > 0 && std::abs(row.ratio - 1.0) > 0.25) out.energy_tracks = false;
    // Rows of a family are in decreasing ε.
    if (j > 0 && out.rows[j - 1].family == row.family && row.count < out.rows[j - 1].count)
      out.counts_monotone = false;
  }
  return out;
}

std::string compact_csv(const CompactResult& r) {
  std::ostringstream os;
  os << "family,epsilon,energy,count,bound,predicted,ratio,converged\n";
  for (const auto& x : r.rows)
    os << x.family << ',' << fmt(x.epsilon) << ',' << fmt(x.energy) << ',' << x.count << ',' << x.bound
       << ',' << fmt(x.predicted) << ',' << fmt(x.ratio) << ',' << (x.converged ? 1 : 0) << '\n';
  return os.str();
}

LimsupResult limsup_check(const LimsupConfig& cfg, const Potential& p, const Kernel& k) {
  if (k.dim() != 2) throw ParameterError("limsup check requires a 2D kernel");
  OracleConfig oc = cfg.oracle;
  if (oc.psi_value) throw ParameterError("limsup check needs the cell argmin; psi_value cannot be used");
  return limsup_check(cfg, p, k, oracle_psi(p, k, oc, cfg.solver));
}

LimsupResult limsup_check(const LimsupConfig& cfg, const Potential& p, const Kernel& k,
                          const PsiResult& cell) {
  if (k.dim() != 2) throw ParameterError("limsup check requires a 2D kernel");
  if (!cell.profile) throw ParameterError("limsup check requires a cell argmin from a psi run");
  if (!(cfg.nodes_per_eps >= 2.0)) throw ParameterError("nodes_per_eps must be >= 2");
  const Field& prof = *cell.profile;
  const Vec2 nu = cell.nu;
  const double hw = cell.strip_halfwidth;
  auto U = [&](double t) {
    if (t >= hw) return 1.0;
    if (t <= -hw) return -1.0;
    return interpolate(prof, {t * nu[0], t * nu[1]});
  };

  LimsupResult out;
  out.psi = cell.psi;
  out.eps_star = cell.argmin_eps;
  out.nodes = std::max(8, static_cast<int>(std::ceil(cfg.nodes_per_eps / out.eps_star)));
  const Grid grid = unit_strip_box(out.nodes);
  std::vector<double> eps = cfg.eps;
  eps.push_back(out.eps_star);
  std::sort(eps.begin(), eps.end(), std::greater<>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());

  out.rows.resize(eps.size());
  parallel_tasks(eps.size(), [&](std::size_t i) {
    const double e = eps[i];
    LimsupRow& row = out.rows[i];
    row.epsilon = e;
    row.predicted = out.psi;  // interface length 1
    EnergyModel m(grid, p, k, e);
    const double s = out.eps_star / e;
    const Field opt = Field::from_function(grid, [&](const Vec2& x) { return U(s * (x[0] - 0.5)); });
    const double width = cfg.mollified_width * e;
    const Field mol = Field::from_function(
        grid, [&](const Vec2& x) { return Mollifier::get(1).step((x[0] - 0.5) / width); });
    row.energy_optimal = energy_total(opt, m).total;
    row.energy_mollified = energy_total(mol, m).total;
    row.ratio_optimal = row.energy_optimal / row.predicted;
    row.ratio_mollified = row.energy_mollified / row.predicted;
  });
  return out;
}

std::string limsup_csv(const LimsupResult& r) {
  std::ostringstream os;
  os << "epsilon,energy_optimal,energy_mollified,predicted,ratio_optimal,ratio_mollified\n";
  for (const auto& x : r.rows)
    os << fmt(x.epsilon) << ',' << fmt(x.energy_optimal) << ',' << fmt(x.energy_mollified) << ','
       << fmt(x.predicted) << ',' << fmt(x.ratio_optimal) << ',' << fmt(x.ratio_mollified) << '\n';
  return os.str();
}

}  // namespace nlch
