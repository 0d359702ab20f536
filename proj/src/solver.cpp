#include "nlch/solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nlch/cubature.hpp"
#include "nlch/errors.hpp"
#include "nlch/parallel.hpp"

namespace nlch {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

double dot(const Vec2& a, const Vec2& b, int dim) { return a[0] * b[0] + (dim == 2 ? a[1] * b[1] : 0.0); }

int good_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// P = a + b DᵀD with the interior symbol of DᵀD, inverted by FFT on the index grid
// (fixed axes zero-padded).
class Preconditioner {
 public:
  explicit Preconditioner(const EnergyModel& model) : grid_(model.grid()) {
    const Grid& g = grid_;
    for (int ax = 0; ax < 2; ++ax) {
      const int n = g.shape()[ax];
      padded_[ax] = n == 1 ? 1 : (g.periodic(ax) ? n : good_fft_size(n + 8));
    }
    const int p0 = padded_[0], p1 = padded_[1];
    real_size_ = static_cast<std::size_t>(p0) * p1;
    complex_size_ = static_cast<std::size_t>(p0 / 2 + 1) * p1;
    real_ = fftw_alloc_real(real_size_);
    spec_ = fftw_alloc_complex(complex_size_);
    std::unique_lock<std::mutex> lock(fftw_plan_mutex());
    if (p1 > 1) {
      fwd_ = fftw_plan_dft_r2c_2d(p1, p0, real_, spec_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_2d(p1, p0, spec_, real_, FFTW_ESTIMATE);
    } else {
      fwd_ = fftw_plan_dft_r2c_1d(p0, real_, spec_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_1d(p0, spec_, real_, FFTW_ESTIMATE);
    }
    lock.unlock();

    // Curvature of W at the wells, at least 1.
    const auto& W = model.potential();
    const double d = 1e-3;
    double curv = 1.0;
    for (double s : {-1.0, 1.0})
      curv = std::max(curv, (W.value(s + d) + W.value(s - d) - 2.0 * W.value(s)) / (d * d));
    const double a = curv / model.epsilon();
    const double b = 4.0 * model.epsilon() * model.stencil().weight_sum();

    // Response of DᵀD to a delta at the most interior node.
    std::array<int, 2> c{g.shape()[0] / 2, g.shape()[1] / 2};
    const std::size_t centre = g.index(c[0], c[1]);
    std::vector<double> delta(g.size(), 0.0), resp;
    delta[centre] = 1.0;
    std::array<std::vector<double>, 2> grad;
    model.gradient_operator().apply(delta, grad);
    model.gradient_operator().apply_transpose(grad, resp);
    std::fill(real_, real_ + real_size_, 0.0);
    for (std::size_t y = 0; y < g.size(); ++y) {
      if (resp[y] == 0.0) continue;
      const auto cy = g.coords(y);
      std::array<int, 2> off{cy[0] - c[0], cy[1] - c[1]};
      for (int ax = 0; ax < 2; ++ax) {
        const int n = g.shape()[ax];
        if (g.periodic(ax)) {
          if (off[ax] > n / 2) off[ax] -= n;
          if (off[ax] < -n / 2) off[ax] += n;
        }
        off[ax] = ((off[ax] % padded_[ax]) + padded_[ax]) % padded_[ax];
      }
      // resp is in units of the cell volume (Dᵀ of a quadrature-free operator).
      real_[off[0] + static_cast<std::size_t>(p0) * off[1]] += resp[y];
    }
    fftw_execute(fwd_);
    inv_symbol_.resize(complex_size_);
    for (std::size_t k = 0; k < complex_size_; ++k)
      inv_symbol_[k] = 1.0 / (a + b * std::max(0.0, spec_[k][0]));
  }
  ~Preconditioner() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  Preconditioner(const Preconditioner&) = delete;
  Preconditioner& operator=(const Preconditioner&) = delete;

  void apply(const std::vector<double>& in, std::vector<double>& out) {
    const Grid& g = grid_;
    const std::size_t p0 = padded_[0];
    std::fill(real_, real_ + real_size_, 0.0);
    for (int j = 0; j < g.shape()[1]; ++j)
      for (int i = 0; i < g.shape()[0]; ++i) real_[i + p0 * j] = in[g.index(i, j)];
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < complex_size_; ++k) {
      spec_[k][0] *= inv_symbol_[k];
      spec_[k][1] *= inv_symbol_[k];
    }
    fftw_execute(bwd_);
    const double scale = 1.0 / static_cast<double>(real_size_);
    out.resize(in.size());
    for (int j = 0; j < g.shape()[1]; ++j)
      for (int i = 0; i < g.shape()[0]; ++i) out[g.index(i, j)] = real_[i + p0 * j] * scale;
  }

 private:
  Grid grid_;
  std::array<int, 2> padded_{1, 1};
  std::size_t real_size_ = 0, complex_size_ = 0;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
  std::vector<double> inv_symbol_;
};

}  // namespace

void SolverConfig::validate() const {
  if (max_iters <= 0) throw ParameterError("solver max_iters must be > 0");
  if (!(grad_tol > 0.0)) throw ParameterError("solver grad_tol must be > 0");
  if (step_rule == StepRule::fixed && !(fixed_step > 0.0))
    throw ParameterError("solver fixed_step must be > 0");
  if (clamp && !(*clamp >= 1.0)) throw ParameterError("solver clamp must be >= 1");
  if (trace_every <= 0) throw ParameterError("solver trace_every must be > 0");
}

ConstraintSpec ConstraintSpec::profile(const Vec2& nu, double halfwidth) {
  if (!(halfwidth > 0.0)) throw ParameterError("profile halfwidth must be > 0");
  ConstraintSpec c;
  c.kind = Kind::profile;
  c.normal = nu;
  c.halfwidth = halfwidth;
  return c;
}

std::vector<double> pinned_values(const Grid& grid, const ConstraintSpec& cons) {
  const int n = grid.dim();
  std::vector<double> out(grid.size(), std::numeric_limits<double>::quiet_NaN());
  // A relative slack absorbs round-off in x·ν for nodes that sit exactly on a slab edge.
  const double tol = 1e-9 * std::max(grid.spacing(0), grid.spacing(1));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2 x = grid.position(i);
    if (cons.kind == ConstraintSpec::Kind::profile) {
      const double d = dot(x, cons.normal, n);
      if (d >= cons.halfwidth - tol) out[i] = 1.0;
      if (d <= -cons.halfwidth + tol) out[i] = -1.0;
    }
    for (const auto& p : cons.pins) {
      const double d = dot(x, p.normal, n);
      if (d >= p.lo - tol && d <= p.hi + tol) out[i] = p.value;
    }
  }
  return out;
}

Field project_constraints(const Field& f, const ConstraintSpec& cons) {
  Field out = f;
  const auto pins = pinned_values(f.grid, cons);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!std::isnan(pins[i])) out.values[i] = pins[i];
  return out;
}

void check_constraints(const Field& f, const ConstraintSpec& cons) {
  const auto pins = pinned_values(f.grid, cons);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isnan(pins[i]) && f.values[i] != pins[i]) {
      const Vec2 x = f.grid.position(i);
      std::ostringstream os;
      os << "node " << i << " at (" << x[0] << ", " << x[1] << ") has value " << f.values[i]
         << " but is pinned to " << pins[i];
      throw ConstraintError(os.str());
    }
  }
}

MinimizeResult minimize(const Field& f0, const EnergyModel& model, const ConstraintSpec& cons,
                        const SolverConfig& cfg) {
  cfg.validate();
  check_constraints(f0, cons);
  const Grid& grid = f0.grid;
  const std::size_t n = grid.size();
  const auto pins = pinned_values(grid, cons);
  std::vector<double> inv_w(n);
  for (std::size_t i = 0; i < n; ++i) inv_w[i] = std::isnan(pins[i]) ? 1.0 / grid.quad_weight(i) : 0.0;

  // Preconditioned gradient p = g/ω restricted to free nodes.
  auto precondition = [&](const std::vector<double>& g, std::vector<double>& p) {
    p.resize(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = g[i] * inv_w[i];
  };
  auto sup = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  std::optional<Preconditioner> pre;
  if (cfg.precondition) pre.emplace(model);
  // z = mask P^{-1} p
  auto search = [&](const std::vector<double>& p, std::vector<double>& z) {
    if (pre) {
      pre->apply(p, z);
      for (std::size_t i = 0; i < n; ++i)
        if (inv_w[i] == 0.0) z[i] = 0.0;
    } else {
      z = p;
    }
  };

  MinimizeResult res{f0, {}, {}, false, 0, 0.0, ""};
  Field u = f0;
  auto eg = energy_and_gradient(u, model);
  std::vector<double> p, p_new, z, z_new, prod(n);
  precondition(eg.gradient, p);
  search(p, z);
  double gnorm = sup(p);
  double alpha = cfg.step_rule == StepRule::fixed ? cfg.fixed_step
                 : pre                             ? 1.0
                                                   : 1.0 / std::max(1.0, gnorm);
  res.trace.push_back({0, eg.report.total, gnorm, 0.0});

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (gnorm <= cfg.grad_tol * (1.0 + std::abs(eg.report.total))) {
      res.converged = true;
      res.stop_reason = "gradient tolerance reached";
      break;
    }
    for (std::size_t i = 0; i < n; ++i) prod[i] = -eg.gradient[i] * z[i];
    const double slope = pairwise_sum(prod);
    if (!(slope < 0.0)) {
      res.stop_reason = "no descent direction";
      break;
    }
    Field trial = u;
    EnergyAndGradient eg_new;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        double v = u.values[i] - alpha * z[i];
        if (cfg.clamp) v = std::clamp(v, -*cfg.clamp, *cfg.clamp);
        trial.values[i] = v;
      }
      eg_new = energy_and_gradient(trial, model);
      if (eg_new.report.total <= eg.report.total + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
      // Near a minimizer the energy change drops to round-off while the gradient is
      // still accurate; accept on the approximate Wolfe conditions in that regime.
      if (eg_new.report.total <= eg.report.total + 1e-12 * (1.0 + std::abs(eg.report.total))) {
        for (std::size_t i = 0; i < n; ++i) prod[i] = -eg_new.gradient[i] * z[i];
        const double slope_new = pairwise_sum(prod);
        if (slope_new <= -0.8 * slope && slope_new >= 0.9 * slope) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.stop_reason = "line search stalled";
      break;
    }
    precondition(eg_new.gradient, p_new);
    search(p_new, z_new);
    const double used = alpha;
    if (cfg.step_rule == StepRule::barzilai_borwein) {
      // BB2 in the metric of P: (s·y)/(y·P^{-1}y), with P^{-1}y = z_new - z.
      std::vector<double> sy(n), yz(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double y = p_new[i] - p[i];
        sy[i] = (trial.values[i] - u.values[i]) * y;
        yz[i] = y * (z_new[i] - z[i]);
      }
      const double a = pairwise_sum(sy), b = pairwise_sum(yz);
      alpha = (a > 0.0 && b > 0.0) ? std::clamp(a / b, 1e-12, 1e12) : std::min(2.0 * alpha, 1e12);
    } else {
      alpha = cfg.fixed_step;
    }
    u = std::move(trial);
    eg = std::move(eg_new);
    p.swap(p_new);
    z.swap(z_new);
    gnorm = sup(p);
    if ((it + 1) % cfg.trace_every == 0) res.trace.push_back({it + 1, eg.report.total, gnorm, used});
  }
  if (!res.converged && res.stop_reason.empty()) res.stop_reason = "iteration budget exhausted";
  if (res.trace.back().iter != it) res.trace.push_back({it, eg.report.total, gnorm, 0.0});
  res.iterations = it;
  res.grad_norm = gnorm;
  res.report = eg.report;
  res.field = std::move(u);
  return res;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os << "iter,energy,grad_norm,step\n" << std::setprecision(17);
  for (const auto& r : trace) os << r.iter << ',' << r.energy << ',' << r.grad_norm << ',' << r.step << '\n';
  return os.str();
}

}  // namespace nlch
