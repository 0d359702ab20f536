#include "nlch/stencil_conv.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstdlib>

#include "nlch/errors.hpp"
#include "nlch/parallel.hpp"

namespace nlch {

namespace {

int good_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

int wrap(long v, int p) {
  long r = v % p;
  return static_cast<int>(r < 0 ? r + p : r);
}

}  // namespace

struct StencilConvolver::Fft {
  std::array<int, 2> padded{1, 1};
  int rank = 1;
  std::size_t real_size = 0, complex_size = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  std::vector<std::complex<double>> kernel_hat;
  fftw_plan forward = nullptr, backward = nullptr;

  ~Fft() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
  }
};

StencilConvolver::StencilConvolver(const Grid& grid, const DiscreteStencil& stencil,
                                   ConvBackend backend)
    : grid_(grid), backend_(backend) {
  if (stencil.dim != grid.dim()) throw ParameterError("stencil and grid dimensions differ");
  offsets_.reserve(stencil.offsets.size());
  for (const auto& d : stencil.offsets) offsets_.push_back(grid.lattice_to_index(d));
  weights_ = stencil.weights;
  if (backend_ != ConvBackend::fft) return;

  fft_ = std::make_unique<Fft>();
  auto& f = *fft_;
  for (int a = 0; a < 2; ++a) {
    const int n = grid.shape()[a];
    if (n == 1) continue;
    if (grid.periodic(a)) {
      f.padded[a] = n;
    } else {
      int ext = 0;
      for (const auto& d : offsets_) ext = std::max(ext, std::abs(d[a]));
      f.padded[a] = good_fft_size(n + ext);
    }
  }
  f.rank = f.padded[1] > 1 ? 2 : 1;
  const int p0 = f.padded[0], p1 = f.padded[1];
  f.real_size = static_cast<std::size_t>(p0) * p1;
  f.complex_size = static_cast<std::size_t>(p0 / 2 + 1) * p1;
  f.real = fftw_alloc_real(f.real_size);
  f.spec = fftw_alloc_complex(f.complex_size);
  // FFTW is row-major with the last dimension fastest; index axis 0 is fastest here.
  std::unique_lock<std::mutex> lock(fftw_plan_mutex());
  if (f.rank == 2) {
    f.forward = fftw_plan_dft_r2c_2d(p1, p0, f.real, f.spec, FFTW_ESTIMATE);
    f.backward = fftw_plan_dft_c2r_2d(p1, p0, f.spec, f.real, FFTW_ESTIMATE);
  } else {
    f.forward = fftw_plan_dft_r2c_1d(p0, f.real, f.spec, FFTW_ESTIMATE);
    f.backward = fftw_plan_dft_c2r_1d(p0, f.spec, f.real, FFTW_ESTIMATE);
  }
  lock.unlock();
  if (!f.forward || !f.backward) throw NumericalError("FFTW planning failed");

  std::fill(f.real, f.real + f.real_size, 0.0);
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    const auto& d = offsets_[k];
    const int i0 = wrap(-d[0], p0), i1 = wrap(-d[1], p1);
    f.real[i0 + static_cast<std::size_t>(p0) * i1] += weights_[k];
  }
  fftw_execute(f.forward);
  f.kernel_hat.resize(f.complex_size);
  for (std::size_t k = 0; k < f.complex_size; ++k)
    f.kernel_hat[k] = {f.spec[k][0], f.spec[k][1]};
}

StencilConvolver::~StencilConvolver() = default;
StencilConvolver::StencilConvolver(StencilConvolver&&) noexcept = default;
StencilConvolver& StencilConvolver::operator=(StencilConvolver&&) noexcept = default;

ConvBackend StencilConvolver::preferred(const Grid& grid, const DiscreteStencil& stencil) {
  (void)grid;
  return stencil.offsets.size() > 48 ? ConvBackend::fft : ConvBackend::direct;
}

void StencilConvolver::apply(const std::vector<double>& in, std::vector<double>& out) const {
  if (in.size() != grid_.size()) throw ParameterError("convolution input has the wrong size");
  if (backend_ == ConvBackend::fft)
    apply_fft(in, out);
  else
    apply_direct(in, out);
}

void StencilConvolver::apply_direct(const std::vector<double>& in, std::vector<double>& out) const {
  out.assign(in.size(), 0.0);
  parallel_for(in.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t x = b; x < e; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < offsets_.size(); ++k) {
        std::size_t y;
        if (grid_.shifted(x, offsets_[k], y)) acc += weights_[k] * in[y];
      }
      out[x] = acc;
    }
  });
}

void StencilConvolver::apply_fft(const std::vector<double>& in, std::vector<double>& out) const {
  auto& f = *fft_;
  const int n0 = grid_.shape()[0], n1 = grid_.shape()[1];
  const std::size_t p0 = f.padded[0];
  std::fill(f.real, f.real + f.real_size, 0.0);
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) f.real[i + p0 * j] = in[grid_.index(i, j)];
  fftw_execute(f.forward);
  for (std::size_t k = 0; k < f.complex_size; ++k) {
    const std::complex<double> v = std::complex<double>(f.spec[k][0], f.spec[k][1]) * f.kernel_hat[k];
    f.spec[k][0] = v.real();
    f.spec[k][1] = v.imag();
  }
  fftw_execute(f.backward);
  const double scale = 1.0 / static_cast<double>(f.real_size);
  out.resize(in.size());
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) out[grid_.index(i, j)] = f.real[i + p0 * j] * scale;
}

}  // namespace nlch
