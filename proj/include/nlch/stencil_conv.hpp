#pragma once

#include <memory>
#include <vector>

#include "nlch/grid.hpp"
#include "nlch/kernel.hpp"

namespace nlch {

enum class ConvBackend { direct, fft };

// out[x] = Σ_d w_d in[x + d] over the stencil, with periodic axes wrapped and
// terms leaving a fixed axis dropped. The weights are even, so this is both a
// correlation and a convolution.
class StencilConvolver {
 public:
  StencilConvolver(const Grid& grid, const DiscreteStencil& stencil, ConvBackend backend);
  ~StencilConvolver();
  StencilConvolver(StencilConvolver&&) noexcept;
  StencilConvolver& operator=(StencilConvolver&&) noexcept;

  // FFT once the stencil has more than a few dozen points.
  static ConvBackend preferred(const Grid& grid, const DiscreteStencil& stencil);

  ConvBackend backend() const { return backend_; }
  const Grid& grid() const { return grid_; }
  // Stencil offsets in index units (skew lattices are remapped).
  const std::vector<std::array<int, 2>>& index_offsets() const { return offsets_; }
  const std::vector<double>& weights() const { return weights_; }

  // Not safe to call concurrently on one instance (FFT work buffers are shared).
  void apply(const std::vector<double>& in, std::vector<double>& out) const;

 private:
  struct Fft;
  Grid grid_;
  ConvBackend backend_;
  std::vector<std::array<int, 2>> offsets_;
  std::vector<double> weights_;
  std::unique_ptr<Fft> fft_;

  void apply_direct(const std::vector<double>& in, std::vector<double>& out) const;
  void apply_fft(const std::vector<double>& in, std::vector<double>& out) const;
};

}  // namespace nlch
