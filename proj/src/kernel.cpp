#include "nlch/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlch/cubature.hpp"
#include "nlch/errors.hpp"

namespace nlch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(const Vec2& x, int dim) {
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

void require_positive_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) {
    std::ostringstream os;
    os << "epsilon must be > 0, got " << epsilon;
    throw ParameterError(os.str());
  }
}

// Adaptive Gauss-Kronrod on a finite interval; throws if the error estimate is poor.
template <class F>
double gk_integrate(F f, double a, double b, const char* what) {
  double err = 0.0, l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13, &err, &l1);
  if (!(err <= 1e-9 * std::max(1.0, l1))) {
    std::ostringstream os;
    os << what << ": quadrature did not converge on [" << a << ", " << b << "], value " << v
       << ", error estimate " << err;
    throw NumericalError(os.str());
  }
  return v;
}

// ∫_a^b f over a finite interval with a possible integrable endpoint singularity at a.
template <class F>
double singular_integrate(F f, double a, double b, const char* what) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0, l1 = 0.0;
  const double v = ts.integrate(f, a, b, 1e-13, &err, &l1);
  if (!(err <= 1e-9 * std::max(1.0, l1))) {
    std::ostringstream os;
    os << what << ": tanh-sinh quadrature did not converge on [" << a << ", " << b
       << "], error estimate " << err;
    throw NumericalError(os.str());
  }
  return v;
}

template <class F>
double tail_integrate(F f, double a, const char* what) {
  boost::math::quadrature::exp_sinh<double> es;
  double err = 0.0, l1 = 0.0;
  const double v = es.integrate(f, a, kInf, 1e-13, &err, &l1);
  if (!(err <= 1e-9 * std::max(1.0, l1))) {
    std::ostringstream os;
    os << what << ": exp-sinh quadrature did not converge on [" << a << ", inf), error estimate "
       << err;
    throw NumericalError(os.str());
  }
  return v;
}

// ∫_a^b f(t) dt, split at the given breakpoints, Gauss-Kronrod on each piece.
template <class F>
double piecewise_integrate(F f, double a, double b, const std::vector<double>& breaks) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] <= pts[i]) continue;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1],
                                                                            15, 1e-12, &err);
  }
  return total;
}

}  // namespace

std::string to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::band:
      return "band";
    case KernelVariant::smooth_bump:
      return "smooth_bump";
    case KernelVariant::gagliardo:
      return "gagliardo";
  }
  return "unknown";
}

KernelSpec KernelSpec::band(double r, double R, double a, int dim) {
  KernelSpec k;
  k.variant = KernelVariant::band;
  k.r = r;
  k.R = R;
  k.a = a;
  k.dim = dim;
  return k;
}

KernelSpec KernelSpec::smooth_bump(double R, double a, int dim) {
  KernelSpec k;
  k.variant = KernelVariant::smooth_bump;
  k.R = R;
  k.a = a;
  k.dim = dim;
  return k;
}

KernelSpec KernelSpec::gagliardo(double s, int dim) {
  KernelSpec k;
  k.variant = KernelVariant::gagliardo;
  k.s = s;
  k.dim = dim;
  return k;
}

void KernelSpec::validate() const {
  if (dim != 1 && dim != 2) throw ParameterError("kernel dimension must be 1 or 2");
  switch (variant) {
    case KernelVariant::band:
      if (!(r > 0.0 && r < R)) throw ParameterError("band kernel requires 0 < r < R");
      if (!(a > 0.0)) throw ParameterError("band kernel requires a > 0");
      break;
    case KernelVariant::smooth_bump:
      if (!(R > 0.0)) throw ParameterError("smooth_bump kernel requires R > 0");
      if (!(a > 0.0)) throw ParameterError("smooth_bump kernel requires a > 0");
      break;
    case KernelVariant::gagliardo:
      if (!(s > 0.5 && s < 1.0)) {
        std::ostringstream os;
        os << "gagliardo kernel requires 1/2 < s < 1 (strict), got s = " << s;
        throw ParameterError(os.str());
      }
      break;
  }
}

Kernel::Kernel(KernelSpec spec) : spec_(spec) { spec_.validate(); }

double Kernel::radial(double rho) const {
  rho = std::abs(rho);
  switch (spec_.variant) {
    case KernelVariant::band:
      return (rho > spec_.r && rho < spec_.R) ? spec_.a : 0.0;
    case KernelVariant::smooth_bump: {
      if (rho >= spec_.R) return 0.0;
      const double q = rho / spec_.R;
      return spec_.a * std::exp(1.0 - 1.0 / (1.0 - q * q));
    }
    case KernelVariant::gagliardo:
      if (rho == 0.0) throw SingularityError("gagliardo kernel is singular at x = 0");
      return std::pow(rho, -spec_.dim - 2.0 * spec_.s);
  }
  return 0.0;
}

double Kernel::eval(const Vec2& x) const { return radial(norm(x, spec_.dim)); }

double Kernel::radial_rescaled(double epsilon, double rho) const {
  require_positive_epsilon(epsilon);
  return std::pow(epsilon, -spec_.dim) * radial(rho / epsilon);
}

double Kernel::eval_rescaled(double epsilon, const Vec2& x) const {
  return radial_rescaled(epsilon, norm(x, spec_.dim));
}

double Kernel::directional(const Vec2& xi, double t) const {
  const double at = std::abs(t);
  const double j = eval({t * xi[0], t * xi[1]});
  return spec_.dim == 1 ? j : j * std::pow(at, spec_.dim - 1);
}

double Kernel::directional_rescaled(const Vec2& xi, double epsilon, double t) const {
  require_positive_epsilon(epsilon);
  return directional(xi, t / epsilon) / epsilon;
}

double Kernel::support_radius() const {
  switch (spec_.variant) {
    case KernelVariant::band:
    case KernelVariant::smooth_bump:
      return spec_.R;
    case KernelVariant::gagliardo:
      return kInf;
  }
  return kInf;
}

std::vector<double> Kernel::radial_breakpoints() const {
  switch (spec_.variant) {
    case KernelVariant::band:
      return {spec_.r, spec_.R};
    case KernelVariant::smooth_bump:
      return {spec_.R};
    case KernelVariant::gagliardo:
      return {};
  }
  return {};
}

double sphere_measure(int dim) { return dim == 1 ? 2.0 : 2.0 * std::numbers::pi; }

double Kernel::moment_tail(double T) const {
  const int n = spec_.dim;
  const double sigma = sphere_measure(n);
  const bool power = spec_.variant == KernelVariant::gagliardo;
  const double s = spec_.s;
  auto integrand = [this, n, power, s](double t) {
    if (t <= 0.0) return 0.0;
    // Combined power t^(n-1) t^(-n-2s) min(t, t^2): no overflow next to t = 0.
    if (power) return t <= 1.0 ? std::pow(t, 1.0 - 2.0 * s) : std::pow(t, -2.0 * s);
    return radial(t) * std::min(t, t * t) * std::pow(t, n - 1);
  };
  const double support = support_radius();
  T = std::max(T, 0.0);
  if (T >= support) return 0.0;

  std::vector<double> breaks = radial_breakpoints();
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());

  double total = 0.0;
  if (spec_.variant == KernelVariant::gagliardo) {
    // Singular like t^(1-2s) at 0 and decaying like t^(-2s) at infinity.
    if (T < 1.0) {
      total += T == 0.0 ? singular_integrate(integrand, 0.0, 1.0, "kernel moment")
                        : gk_integrate(integrand, T, 1.0, "kernel moment");
      total += tail_integrate(integrand, 1.0, "kernel moment");
    } else {
      total += tail_integrate(integrand, T, "kernel moment");
    }
    return sigma * total;
  }
  std::vector<double> pts{T};
  for (double b : breaks)
    if (b > T && b < support) pts.push_back(b);
  pts.push_back(support);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += gk_integrate(integrand, pts[i], pts[i + 1], "kernel moment");
  return sigma * total;
}

double Kernel::moment() const {
  if (!moment_cache_) moment_cache_ = moment_tail(0.0);
  return *moment_cache_;
}

double Kernel::mass() const {
  const int n = spec_.dim;
  switch (spec_.variant) {
    case KernelVariant::band:
      return n == 1 ? 2.0 * spec_.a * (spec_.R - spec_.r)
                    : spec_.a * std::numbers::pi * (spec_.R * spec_.R - spec_.r * spec_.r);
    case KernelVariant::smooth_bump: {
      auto f = [this, n](double t) { return radial(t) * std::pow(t, n - 1); };
      return sphere_measure(n) * gk_integrate(f, 0.0, spec_.R, "kernel mass");
    }
    case KernelVariant::gagliardo:
      return kInf;
  }
  return kInf;
}

// ---------------------------------------------------------------------------
// Non-degeneracy constants

double inverse_directional_integral(const Kernel& kernel, const Vec2& xi, double alpha,
                                    double beta) {
  if (!(alpha < beta)) throw ParameterError("window requires alpha < beta");
  bool degenerate = false;
  auto f = [&](double t) {
    const double j = kernel.directional(xi, t);
    if (!(j > 0.0)) {
      degenerate = true;
      return 0.0;
    }
    return 1.0 / j;
  };
  std::vector<double> breaks;
  for (double b : kernel.radial_breakpoints()) {
    breaks.push_back(b);
    breaks.push_back(-b);
  }
  breaks.push_back(0.0);
  const double v = piecewise_integrate(f, alpha, beta, breaks);
  if (degenerate) {
    std::ostringstream os;
    os << "J^xi vanishes inside the window [" << alpha << ", " << beta << "]";
    throw DegenerateKernelError(os.str());
  }
  return v;
}

std::vector<Vec2> default_directions(int dim) {
  if (dim == 1) return {Vec2{1.0, 0.0}, Vec2{-1.0, 0.0}};
  std::vector<Vec2> out;
  for (int k = 0; k < 16; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 16.0;
    out.push_back({std::cos(th), std::sin(th)});
  }
  return out;
}

NondegeneracyConstants nondegeneracy_constants(const Kernel& kernel,
                                               const std::vector<Vec2>& xi_samples,
                                               std::optional<std::array<double, 2>> window) {
  if (xi_samples.empty()) throw ParameterError("at least one direction is required");
  const auto& spec = kernel.spec();
  NondegeneracyConstants out;
  out.directions = xi_samples;

  auto finish = [&](double lo, double hi, double gamma, double delta) {
    out.gamma_J = gamma;
    out.delta_J = delta;
    out.c_J = 0.0;
    for (const auto& xi : xi_samples) {
      const double v = inverse_directional_integral(kernel, xi, lo, hi);
      out.alpha.push_back(lo);
      out.beta.push_back(hi);
      out.window_integral.push_back(v);
      out.c_J = std::max(out.c_J, v);
    }
    return out;
  };

  if (window) {
    const auto [lo, hi] = *window;
    return finish(lo, hi, std::max(std::abs(lo), std::abs(hi)), hi - lo);
  }
  if (spec.variant == KernelVariant::band) {
    const double n = spec.dim;
    out.remark_c_J = (std::pow(spec.r, -n) - std::pow(spec.R, -n)) / (n * spec.a);
    return finish(spec.r, spec.R, spec.R, spec.R - spec.r);
  }

  // Scan windows of fixed width inside (0, gamma], keep the one with smallest ∫1/J^xi.
  const double gamma = spec.variant == KernelVariant::gagliardo ? 2.0 : spec.R;
  const double width = std::min(0.5 * gamma, 0.9);
  double best_lo = -1.0, best_val = kInf;
  constexpr int kCandidates = 40;
  for (int i = 1; i < kCandidates; ++i) {
    const double lo = (gamma - width) * i / kCandidates;
    const double hi = lo + width;
    if (hi > gamma) break;
    double worst = 0.0;
    try {
      for (const auto& xi : xi_samples)
        worst = std::max(worst, inverse_directional_integral(kernel, xi, lo, hi));
    } catch (const DegenerateKernelError&) {
      continue;
    }
    if (std::isfinite(worst) && worst < best_val) {
      best_val = worst;
      best_lo = lo;
    }
  }
  if (best_lo < 0.0) throw DegenerateKernelError("no window with J^xi bounded below was found");
  return finish(best_lo, best_lo + width, gamma, width);
}

// ---------------------------------------------------------------------------
// Discrete stencils

double DiscreteStencil::weight_sum() const {
  return pairwise_sum(weights);
}

int DiscreteStencil::max_extent(int axis) const {
  int m = 0;
  for (const auto& o : offsets) m = std::max(m, std::abs(o[axis]));
  return m;
}

namespace {

double truncation_scale(const Kernel& kernel, double mass_tol) {
  const double support = kernel.support_radius();
  if (std::isfinite(support)) return support;
  const double target = mass_tol * kernel.moment();
  double T = 1.0;
  while (kernel.moment_tail(T) > target) {
    T *= 2.0;
    if (T > 1e300) throw NumericalError("kernel tail does not decay");
  }
  double lo = T / 2.0, hi = T;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kernel.moment_tail(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

DiscreteStencil discrete_stencil(const Kernel& kernel, double epsilon, std::array<double, 2> spacing,
                                 const StencilOptions& opts) {
  require_positive_epsilon(epsilon);
  const int n = kernel.dim();
  if (!(spacing[0] > 0.0) || (n == 2 && !(spacing[1] > 0.0)))
    throw ParameterError("stencil spacing must be > 0");
  if (n == 1) spacing[1] = 1.0;

  DiscreteStencil st;
  st.dim = n;
  st.epsilon = epsilon;
  st.spacing = spacing;

  double rho = truncation_scale(kernel, opts.mass_tol) * epsilon;
  if (opts.max_radius && rho > *opts.max_radius) {
    rho = *opts.max_radius;
    st.clipped = true;
  }
  st.truncation_radius = rho;
  const double moment = kernel.moment();
  st.captured_mass_fraction = 1.0 - kernel.moment_tail(rho / epsilon) / moment;

  // Whole cells whose centre lies inside the truncation ball, unless the kernel has
  // compact support inside it, in which case every cell meeting the support counts.
  const bool support_inside = std::isfinite(kernel.support_radius()) && !st.clipped;
  const double half_diag = 0.5 * std::hypot(spacing[0], n == 2 ? spacing[1] : 0.0);
  const int ex = static_cast<int>(std::ceil(rho / spacing[0])) + 1;
  const int ey = n == 2 ? static_cast<int>(std::ceil(rho / spacing[1])) + 1 : 0;

  const auto& spec = kernel.spec();
  auto jeps = [&](const std::array<double, 2>& z) {
    const double r = norm(z, n);
    if (r == 0.0) return 0.0;
    return kernel.radial_rescaled(epsilon, r);
  };

  // Absolute floor for the cell cubature, relative to the weight of a cell at |z| = ε/2.
  // Without it, cells cut by the edge of a bump support refine forever on tiny values.
  const double cell_volume = n == 1 ? spacing[0] : spacing[0] * spacing[1];
  const double abs_floor = opts.cell_rel_tol * cell_volume * kernel.radial_rescaled(epsilon, 0.5 * epsilon);

  for (int i = -ex; i <= ex; ++i) {
    for (int j = -ey; j <= ey; ++j) {
      if (i == 0 && j == 0) continue;
      const double cx = i * spacing[0], cy = j * spacing[1];
      const double cr = n == 1 ? std::abs(cx) : std::hypot(cx, cy);
      if (support_inside ? (cr - half_diag >= rho) : (cr > rho)) continue;
      Box cell;
      cell.dim = n;
      cell.lo = {cx - 0.5 * spacing[0], n == 2 ? cy - 0.5 * spacing[1] : 0.0};
      cell.hi = {cx + 0.5 * spacing[0], n == 2 ? cy + 0.5 * spacing[1] : 0.0};
      double w = 0.0;
      if (spec.variant == KernelVariant::band) {
        const double scale = spec.a * std::pow(epsilon, -n);
        w = scale * (ball_box_measure(cell, spec.R * epsilon) - ball_box_measure(cell, spec.r * epsilon));
      } else {
        w = adaptive_cubature(jeps, cell, opts.cell_rel_tol, abs_floor, opts.cell_max_depth).value;
      }
      st.offsets.push_back({i, j});
      st.weights.push_back(w);
    }
  }
  // Candidates are in lexicographic order, so the mirror of entry a sits at size-1-a.
  // Averaging with it makes the weights exactly even.
  const std::size_t count = st.offsets.size();
  for (std::size_t a = 0; a < count / 2; ++a) {
    const std::size_t b = count - 1 - a;
    if (st.offsets[b][0] != -st.offsets[a][0] || st.offsets[b][1] != -st.offsets[a][1])
      throw NumericalError("stencil candidate set is not symmetric");
    const double m = 0.5 * (st.weights[a] + st.weights[b]);
    st.weights[a] = st.weights[b] = m;
  }
  std::size_t keep = 0;
  for (std::size_t a = 0; a < count; ++a) {
    if (!(st.weights[a] > 0.0)) continue;
    st.offsets[keep] = st.offsets[a];
    st.weights[keep] = st.weights[a];
    ++keep;
  }
  st.offsets.resize(keep);
  st.weights.resize(keep);
  return st;
}

DiscreteStencil directional_stencil(const Kernel& kernel, const Vec2& xi, double epsilon, double dt,
                                    const StencilOptions& opts) {
  require_positive_epsilon(epsilon);
  if (!(dt > 0.0)) throw ParameterError("slice step must be > 0");
  DiscreteStencil st;
  st.dim = 1;
  st.epsilon = epsilon;
  st.spacing = {dt, 1.0};

  double rho = truncation_scale(kernel, opts.mass_tol) * epsilon;
  if (opts.max_radius && rho > *opts.max_radius) {
    rho = *opts.max_radius;
    st.clipped = true;
  }
  st.truncation_radius = rho;
  st.captured_mass_fraction = 1.0 - kernel.moment_tail(rho / epsilon) / kernel.moment();
  const bool support_inside = std::isfinite(kernel.support_radius()) && !st.clipped;

  std::vector<double> breaks;
  for (double b : kernel.radial_breakpoints()) breaks.push_back(b * epsilon);
  auto f = [&](double t) {
    if (t == 0.0) return 0.0;
    return kernel.directional_rescaled(xi, epsilon, t);
  };
  const int ex = static_cast<int>(std::ceil(rho / dt)) + 1;
  for (int i = 1; i <= ex; ++i) {
    const double c = i * dt;
    if (support_inside ? (c - 0.5 * dt >= rho) : (c > rho)) continue;
    const double w = piecewise_integrate(f, c - 0.5 * dt, c + 0.5 * dt, breaks);
    if (w <= 0.0) continue;
    st.offsets.push_back({i, 0});
    st.weights.push_back(w);
  }
  const std::size_t half = st.offsets.size();
  for (std::size_t k = 0; k < half; ++k) {
    st.offsets.push_back({-st.offsets[k][0], 0});
    st.weights.push_back(st.weights[k]);
  }
  return st;
}

}  // namespace nlch
