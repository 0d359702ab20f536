#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace nlch {

using Vec2 = std::array<double, 2>;

enum class KernelVariant { band, smooth_bump, gagliardo };

std::string to_string(KernelVariant v);

// Radial interaction kernel J on R^n, n in {1,2}.
//   band:        J(x) = a       on r < |x| < R, 0 elsewhere
//   smooth_bump: J(x) = a exp(1 - 1/(1 - (|x|/R)^2)) on |x| < R
//   gagliardo:   J(x) = |x|^(-n-2s), 1/2 < s < 1
struct KernelSpec {
  KernelVariant variant = KernelVariant::band;
  int dim = 1;
  double r = 1.0;
  double R = 2.0;
  double a = 1.0;
  double s = 0.75;

  static KernelSpec band(double r, double R, double a, int dim);
  static KernelSpec smooth_bump(double R, double a, int dim);
  static KernelSpec gagliardo(double s, int dim);

  // Throws ParameterError naming the violated bound.
  void validate() const;
};

// Immutable after construction.
class Kernel {
 public:
  explicit Kernel(KernelSpec spec);

  const KernelSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }

  // J as a function of |x|.
  double radial(double rho) const;
  double eval(const Vec2& x) const;
  // J_eps(x) = eps^-n J(x / eps).
  double eval_rescaled(double epsilon, const Vec2& x) const;
  double radial_rescaled(double epsilon, double rho) const;

  // J^xi(t) = J(t xi)|t|^(n-1); the rescaled form is eps^-1 J^xi(t/eps).
  double directional(const Vec2& xi, double t) const;
  double directional_rescaled(const Vec2& xi, double epsilon, double t) const;

  // +inf for kernels without compact support.
  double support_radius() const;
  // Radii where J or its derivatives jump (used to split quadratures).
  std::vector<double> radial_breakpoints() const;

  // M_J = ∫ J(x) (|x| ∧ |x|^2) dx, cached on first use.
  double moment() const;
  // ∫_{|x| > T} J(x)(|x| ∧ |x|^2) dx
  double moment_tail(double T) const;
  // ∫ J(x) dx; +inf for gagliardo.
  double mass() const;

 private:
  KernelSpec spec_;
  mutable std::optional<double> moment_cache_;
};

// |S^{n-1}|: 2 for n = 1, 2π for n = 2.
double sphere_measure(int dim);

struct NondegeneracyConstants {
  double gamma_J = 0.0;
  double delta_J = 0.0;
  double c_J = 0.0;
  std::vector<Vec2> directions;
  std::vector<double> alpha;
  std::vector<double> beta;
  // Quadrature value of ∫_alpha^beta dt / J^xi(t) per direction.
  std::vector<double> window_integral;
  // Band kernels only: (n a)^-1 (r^-n - R^-n). This is ∫_r^R dt/(a t^(n+1)) and is
  // smaller than the window integral, so c_J above is the quadrature maximum instead.
  std::optional<double> remark_c_J;
};

// Band kernels use the annulus window [r, R] with gamma = R, delta = R - r; other
// variants search [0, gamma] for a window on which J^xi is bounded below. c_J is
// the largest window integral over the sampled directions.
// `window` forces [alpha, beta] for every direction.
NondegeneracyConstants nondegeneracy_constants(
    const Kernel& kernel, const std::vector<Vec2>& xi_samples,
    std::optional<std::array<double, 2>> window = std::nullopt);

// ∫_alpha^beta dt / J^xi(t), adaptive Gauss-Kronrod.
double inverse_directional_integral(const Kernel& kernel, const Vec2& xi, double alpha,
                                    double beta);

// 16 equispaced unit vectors on S^1, or {+1, -1} in n = 1.
std::vector<Vec2> default_directions(int dim);

// Cell-integrated discrete weights of J_eps on a lattice with the given spacing.
struct DiscreteStencil {
  int dim = 1;
  double epsilon = 0.0;
  std::array<double, 2> spacing{0.0, 0.0};
  std::vector<std::array<int, 2>> offsets;
  std::vector<double> weights;
  double truncation_radius = 0.0;
  double captured_mass_fraction = 1.0;
  bool clipped = false;

  double weight_sum() const;
  int max_extent(int axis) const;
};

struct StencilOptions {
  double mass_tol = 1e-6;
  // Upper bound on the stencil radius, e.g. the domain diameter; nullopt = none.
  std::optional<double> max_radius;
  // Relative tolerance of the adaptive cell cubature.
  double cell_rel_tol = 1e-10;
  int cell_max_depth = 10;
};

// Zero offset excluded; offsets closed under negation with equal weights.
DiscreteStencil discrete_stencil(const Kernel& kernel, double epsilon,
                                 std::array<double, 2> spacing,
                                 const StencilOptions& opts = {});

// One-dimensional stencil of the rescaled directional kernel J^xi_eps with step dt.
DiscreteStencil directional_stencil(const Kernel& kernel, const Vec2& xi, double epsilon,
                                    double dt, const StencilOptions& opts = {});

}  // namespace nlch
