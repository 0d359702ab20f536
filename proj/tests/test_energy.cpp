#include <cmath>
#include <random>

#include "doctest.h"
#include "nlch/energy.hpp"
#include "nlch/errors.hpp"
#include "nlch/interface.hpp"

using namespace nlch;

namespace {

Grid periodic(int dim, int n) {
  GridSpec s;
  s.dim = dim;
  s.nodes = {n, dim == 2 ? n : 1};
  return Grid::cartesian(s);
}

Grid fixed_line(int n, double lo, double hi) {
  GridSpec s;
  s.dim = 1;
  s.nodes = {n, 1};
  s.extent = {hi - lo, 1};
  s.origin = {lo, 0};
  s.boundary = {Boundary::fixed, Boundary::fixed};
  return Grid::cartesian(s);
}

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  Field f(g);
  for (auto& v : f.values) v = u(rng);
  return f;
}

Mask random_mask(const Grid& g, std::mt19937_64& rng) {
  std::bernoulli_distribution b(0.5);
  Mask m(g.size());
  for (auto& v : m) v = b(rng);
  return m;
}

}  // namespace

TEST_CASE("W term") {
  const Grid g = periodic(2, 32);
  const auto W = Potential::quartic();
  CHECK(energy_w(Field(g, 1.0), W, 0.1, full_mask(g)) == 0.0);
  CHECK(energy_w(Field(g, 0.0), W, 0.1, full_mask(g)) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK_THROWS_AS(energy_w(Field(g, 0.0), W, 0.0, full_mask(g)), ParameterError);
  CHECK_THROWS_AS(energy_w(Field(g, 0.0), W, 0.1, Mask(3, 1)), MaskError);

  auto tanh_w = [&](int n) {
    const Grid l = fixed_line(n, -1, 1);
    const Field f = Field::from_function(l, [](const Vec2& x) { return std::tanh(x[0] / 0.1); });
    return energy_w(f, W, 0.1, full_mask(l));
  };
  CHECK(std::abs(tanh_w(201) - tanh_w(2001)) / tanh_w(2001) < 0.01);
}

TEST_CASE("J term vanishes for affine fields") {
  GridSpec s;
  s.dim = 2;
  s.nodes = {24, 24};
  s.boundary = {Boundary::fixed, Boundary::fixed};
  const Grid g = Grid::cartesian(s);
  const EnergyModel model(g, Potential::quartic(), Kernel(KernelSpec::band(1, 2, 1, 2)), 0.1);
  const Field lin = Field::from_function(g, [](const Vec2& x) { return 0.3 * x[0] - 0.2 * x[1]; });
  CHECK(energy_j(Field(g, 0.4), model, full_mask(g), full_mask(g), JPath::direct) == 0.0);
  CHECK(std::abs(energy_j(lin, model, full_mask(g), full_mask(g), JPath::direct)) < 1e-20);
  CHECK(std::abs(energy_j(lin, model, full_mask(g), full_mask(g), JPath::fft)) < 1e-12);
}

TEST_CASE("J symmetry, additivity and path agreement") {
  std::mt19937_64 rng(17);
  for (int dim : {1, 2}) {
    for (Boundary b : {Boundary::periodic, Boundary::fixed}) {
      GridSpec s;
      s.dim = dim;
      s.nodes = {dim == 1 ? 256 : 32, dim == 1 ? 1 : 32};
      s.boundary = {b, b};
      const Grid g = Grid::cartesian(s);
      const EnergyModel model(g, Potential::quartic(), Kernel(KernelSpec::band(1, 2, 1, dim)), 0.1);
      for (int trial = 0; trial < 3; ++trial) {
        const Field f = random_field(g, rng);
        const Mask a = random_mask(g, rng);
        Mask bm(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) bm[i] = a[i] ? 0 : (rng() % 2);
        const double ab = energy_j(f, model, a, bm, JPath::direct);
        const double ba = energy_j(f, model, bm, a, JPath::direct);
        CHECK(std::abs(ab - ba) <= 1e-12 * std::abs(ab));
        const double aa = energy_j(f, model, a, a, JPath::direct);
        const double bb = energy_j(f, model, bm, bm, JPath::direct);
        const double uu = energy_j(f, model, mask_union(a, bm), mask_union(a, bm), JPath::direct);
        CHECK(std::abs(uu - (aa + 2 * ab + bb)) <= 1e-12 * uu);
        const Mask all = full_mask(g);
        const double d = energy_j(f, model, all, all, JPath::direct);
        const double ff = energy_j(f, model, all, all, JPath::fft);
        CHECK(std::abs(d - ff) <= 1e-10 * d);
        const double dab = energy_j(f, model, a, bm, JPath::fft);
        CHECK(std::abs(dab - ab) <= 1e-10 * std::abs(ab));
      }
    }
  }
}

TEST_CASE("energy total") {
  const Grid g = fixed_line(1024, -1, 1);
  const EnergyModel model(g, Potential::quartic(), Kernel(KernelSpec::band(1, 2, 1, 1)), 0.05);
  const auto r0 = energy_total(Field(g, -1.0), model);
  CHECK(r0.total == 0.0);
  const Field u = mollified_interface(g, {{1, 0}, 0.0, 0.05});
  const auto r = energy_total(u, model);
  CHECK(r.total > 0);
  CHECK(std::isfinite(r.total));
  CHECK(r.total == r.w_term + r.j_term);
  CHECK(r.w_term >= 0);
  CHECK(r.j_term >= 0);
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  struct Case {
    Grid grid;
    Kernel kernel;
    double eps;
  };
  GridSpec fx;
  fx.dim = 2;
  fx.nodes = {20, 16};
  fx.boundary = {Boundary::fixed, Boundary::periodic};
  std::vector<Case> cases = {
      {periodic(1, 128), Kernel(KernelSpec::band(1, 2, 1, 1)), 0.05},
      {fixed_line(101, -1, 1), Kernel(KernelSpec::smooth_bump(2, 1, 1)), 0.1},
      {Grid::cartesian(fx), Kernel(KernelSpec::band(1, 2, 1, 2)), 0.15},
      {Grid::skew_strip(1, 2, 6, 0.5), Kernel(KernelSpec::band(1, 2, 1, 2)), 0.1},
  };
  for (const auto& c : cases) {
    const EnergyModel model(c.grid, Potential::quartic(), c.kernel, c.eps);
    const Field u = random_field(c.grid, rng);
    const auto grad = energy_gradient(u, model);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> v(u.size());
      for (auto& x : v) x = nd(rng);
      const double eta = 1e-5;
      Field up = u, um = u;
      for (std::size_t i = 0; i < u.size(); ++i) {
        up[i] += eta * v[i];
        um[i] -= eta * v[i];
      }
      const double fd = (energy_total(up, model).total - energy_total(um, model).total) / (2 * eta);
      double dd = 0;
      for (std::size_t i = 0; i < u.size(); ++i) dd += grad[i] * v[i];
      CHECK(std::abs(fd - dd) <= 1e-6 * std::abs(dd));
    }
  }
}

TEST_CASE("gradient is translation equivariant") {
  const Grid g = periodic(1, 64);
  const EnergyModel model(g, Potential::quartic(), Kernel(KernelSpec::band(1, 2, 1, 1)), 0.05);
  std::mt19937_64 rng(5);
  const Field u = random_field(g, rng);
  Field s(g);
  for (std::size_t i = 0; i < g.size(); ++i) s[(i + 7) % g.size()] = u[i];
  const auto gu = energy_gradient(u, model);
  const auto gs = energy_gradient(s, model);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(gs[(i + 7) % g.size()] == gu[i]);
  const auto g1 = energy_gradient(Field(g, 1.0), model);
  for (double v : g1) CHECK(v == 0.0);
}

TEST_CASE("sliced energy in one dimension") {
  const Grid g = fixed_line(801, -2, 2);
  const Kernel k(KernelSpec::band(1, 2, 1, 1));
  const EnergyModel model(g, Potential::quartic(), k, 0.1);
  const Field u = mollified_interface(g, {{1, 0}, 0.0, 0.3});
  const double sliced = energy_sliced_1d(u.values, g.spacing(0), model.potential(), k, {1, 0}, 0.1);
  // σ_0 = 2: the slice of a 1D field carries half of F_ε.
  CHECK(sliced == doctest::Approx(0.5 * energy_total(u, model).total).epsilon(1e-10));
  CHECK(energy_sliced_1d(std::vector<double>(50, 1.0), 0.01, model.potential(), k, {1, 0}, 0.1) == 0.0);
}
