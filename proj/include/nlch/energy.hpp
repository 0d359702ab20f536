#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nlch/field.hpp"
#include "nlch/kernel.hpp"
#include "nlch/potential.hpp"
#include "nlch/stencil_conv.hpp"

namespace nlch {

// One byte per node, nonzero = inside.
using Mask = std::vector<std::uint8_t>;

Mask full_mask(const Grid& grid);
Mask mask_where(const Grid& grid, const std::function<bool(const Vec2&)>& inside);
Mask mask_union(const Mask& a, const Mask& b);

enum class JPath { automatic, direct, fft };

// Grid, potential, kernel and ε with the discrete stencil and the convolution
// machinery built once. Not safe for concurrent use (shared FFT buffers).
class EnergyModel {
 public:
  EnergyModel(Grid grid, Potential potential, Kernel kernel, double epsilon,
              StencilOptions opts = {});
  // Uses a stencil built by the caller for this ε and the grid spacing.
  EnergyModel(Grid grid, Potential potential, Kernel kernel, DiscreteStencil stencil);

  const Grid& grid() const { return grid_; }
  const Potential& potential() const { return potential_; }
  const Kernel& kernel() const { return kernel_; }
  double epsilon() const { return epsilon_; }
  const DiscreteStencil& stencil() const { return stencil_; }
  const GradientOperator& gradient_operator() const { return grad_; }
  // Trapezoid factors ω/h^n per node.
  const std::vector<double>& relative_weights() const { return rel_; }
  // m_x = Σ_d w_d r_{x+d}.
  const std::vector<double>& local_mass() const { return mass_; }

  const StencilConvolver& convolver(ConvBackend backend) const;
  const StencilConvolver& convolver() const { return convolver(preferred_); }

 private:
  void finish_setup();

  Grid grid_;
  Potential potential_;
  Kernel kernel_;
  double epsilon_;
  DiscreteStencil stencil_;
  GradientOperator grad_;
  ConvBackend preferred_;
  mutable std::unique_ptr<StencilConvolver> direct_, fft_;
  std::vector<double> rel_;
  std::vector<double> mass_;
};

struct EnergyReport {
  double w_term = 0.0;
  double j_term = 0.0;
  double total = 0.0;
  std::string region = "all";
};

// (1/ε) Σ_{x in region} ω_x W(u_x)
double energy_w(const Field& f, const Potential& p, double epsilon, const Mask& region);

// ε Σ_{x in A} ω_x Σ_d w_d r_{x+d} [x+d in B] |∇u(x) - ∇u(x+d)|^2
// The direct path sums pairs literally; the FFT path expands the square into
// three convolutions.
double energy_j(const Field& f, const EnergyModel& model, const Mask& a, const Mask& b,
                JPath path = JPath::automatic);

EnergyReport energy_total(const Field& f, const EnergyModel& model);
EnergyReport energy_total(const Field& f, const EnergyModel& model, const Mask& region,
                          std::string tag);

// ∂F/∂u_x of the discrete energy over the whole grid.
std::vector<double> energy_gradient(const Field& f, const EnergyModel& model);

// Full-domain energy and gradient sharing one set of convolutions, using
// 𝒥 = 2εh^n Σ_x r_x ∇u(x)·(m_x ∇u(x) - (w∗(r∇u))_x).
struct EnergyAndGradient {
  EnergyReport report;
  std::vector<double> gradient;
};
EnergyAndGradient energy_and_gradient(const Field& f, const EnergyModel& model);

// (1/(σ_{n-1} ε)) ∫ W(v) dt + (ε/2) ∬ J^ξ_ε(s-t) (v'(s) - v'(t))^2 ds dt for
// samples v on a uniform step (trapezoid rule, fixed ends).
double energy_sliced_1d(const std::vector<double>& samples, double step, const Potential& p,
                        const Kernel& k, const Vec2& xi, double epsilon,
                        const StencilOptions& opts = {});

// "epsilon,w_term,j_term,total,region"
std::string energy_csv_header();
std::string energy_csv_row(double epsilon, const EnergyReport& r);

}  // namespace nlch
