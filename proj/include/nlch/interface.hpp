#pragma once

#include "nlch/field.hpp"

namespace nlch {

// Standard radial bump θ(x) = c exp(-1/(1-|x|^2)) on the unit ball of R^n, unit mass.
// Only its one-dimensional marginal is needed: the convolution of a flat step with θ_σ
// depends on x·ν alone.
class Mollifier {
 public:
  explicit Mollifier(int dim);

  int dim() const { return dim_; }
  // Marginal density of θ along a unit direction, at t in [-1, 1].
  double marginal(double t) const;
  // ∫_0^r marginal, for r in [0, 1]; profile(1) = 1/2.
  double profile(double r) const;
  // (sign ∗ θ)(t): odd, exactly ±1 for |t| >= 1.
  double step(double t) const;
  // Smooth transition from 0 (t <= -1) to 1 (t >= 1).
  double ramp(double t) const { return 0.5 * (1.0 + step(t)); }

  // Shared instance per dimension.
  static const Mollifier& get(int dim);

 private:
  int dim_;
  double norm_ = 1.0;
  double dx_ = 0.0;
  std::vector<double> table_;     // profile at i * dx
  std::vector<double> slope_;     // marginal at i * dx
  double raw_marginal(double t) const;
};

struct InterfaceSpec {
  Vec2 normal{1.0, 0.0};
  double offset = 0.0;
  double sigma = 0.1;
};

// Node values of w^ν ∗ θ_σ with w^ν(x) = sign(x·ν - offset). Requires σ > 2h.
Field mollified_interface(const Grid& grid, const InterfaceSpec& spec);

// Cutoff φ ∈ [0,1]: 0 within δ of the boundary of the fixed axes, 1 beyond 2δ,
// a product of mollified ramps in between. Identically 1 without fixed axes.
Field blend_cutoff(const Grid& grid, double delta);

// φ inner + (1-φ) outer with φ = blend_cutoff(grid, δ).
Field blend(const Field& inner, const Field& outer, double delta);

}  // namespace nlch
