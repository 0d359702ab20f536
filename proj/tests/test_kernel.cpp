#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nlch/cubature.hpp"
#include "nlch/errors.hpp"
#include "nlch/kernel.hpp"

using namespace nlch;

TEST_CASE("kernel evaluation") {
  const Kernel band(KernelSpec::band(1, 2, 1, 1));
  CHECK(band.eval({1.5, 0}) == 1.0);
  CHECK(band.eval({0.5, 0}) == 0.0);
  const Kernel g(KernelSpec::gagliardo(0.75, 1));
  CHECK(g.eval({2, 0}) == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-14));
  CHECK_THROWS_AS(g.eval({0, 0}), SingularityError);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(Kernel(KernelSpec::gagliardo(1.2, 1)), ParameterError);
  CHECK_THROWS_AS(Kernel(KernelSpec::gagliardo(0.5, 1)), ParameterError);
  CHECK_THROWS_AS(Kernel(KernelSpec::band(2, 1, 1, 1)), ParameterError);
  CHECK_THROWS_AS(Kernel(KernelSpec::band(1, 2, 0, 2)), ParameterError);
}

TEST_CASE("rescaled kernel") {
  const Kernel band(KernelSpec::band(1, 2, 1, 1));
  CHECK(band.eval_rescaled(0.5, {0.75, 0}) == doctest::Approx(2.0));
  CHECK(band.eval_rescaled(1.0, {1.3, 0}) == band.eval({1.3, 0}));
  CHECK_THROWS_AS(band.eval_rescaled(0.0, {1, 0}), ParameterError);
  const Kernel g(KernelSpec::gagliardo(0.75, 1));
  CHECK(g.eval_rescaled(0.1, {1, 0}) == doctest::Approx(std::pow(0.1, 1.5)).epsilon(1e-12));
  // ε^{2s}|x|^{-n-2s} in 2D
  const Kernel g2(KernelSpec::gagliardo(0.6, 2));
  const Vec2 x{0.3, -0.4};
  CHECK(g2.eval_rescaled(0.2, x) ==
        doctest::Approx(std::pow(0.2, 1.2) * std::pow(0.5, -3.2)).epsilon(1e-12));
}

TEST_CASE("evenness on random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const auto& spec : {KernelSpec::band(1, 2, 1, 2), KernelSpec::smooth_bump(2, 1, 2),
                           KernelSpec::gagliardo(0.7, 2)}) {
    const Kernel k(spec);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 x{u(rng), u(rng)};
      CHECK(k.eval(x) == k.eval({-x[0], -x[1]}));
    }
  }
}

TEST_CASE("moments") {
  CHECK(Kernel(KernelSpec::band(1, 2, 1, 1)).moment() == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(Kernel(KernelSpec::band(1, 2, 2.5, 1)).moment() == doctest::Approx(7.5).epsilon(1e-10));
  CHECK(Kernel(KernelSpec::gagliardo(0.75, 1)).moment() == doctest::Approx(8.0).epsilon(1e-9));
  for (double s : {0.55, 0.65, 0.75, 0.85, 0.95}) {
    const double closed = 2.0 * (1.0 / (2.0 - 2.0 * s) + 1.0 / (2.0 * s - 1.0));
    CHECK(Kernel(KernelSpec::gagliardo(s, 1)).moment() == doctest::Approx(closed).epsilon(1e-6));
  }
  // 2D band: 2π ∫_1^2 t·t dt = 14π/3
  CHECK(Kernel(KernelSpec::band(1, 2, 1, 2)).moment() ==
        doctest::Approx(14.0 * std::numbers::pi / 3.0).epsilon(1e-10));
}

TEST_CASE("directional kernel") {
  const Kernel band2(KernelSpec::band(1, 2, 1, 2));
  CHECK(band2.directional({0.6, 0.8}, 1.5) == doctest::Approx(1.5));
  const Kernel band1(KernelSpec::band(1, 2, 1, 1));
  CHECK(band1.directional({1, 0}, 1.5) == band1.eval({1.5, 0}));
  const Kernel g2(KernelSpec::gagliardo(0.75, 2));
  CHECK(g2.directional({1, 0}, 2.0) == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-14));
  // J^ξ_ε(t) = J_ε(tξ)|t|^{n-1}
  const Vec2 xi{0.6, 0.8};
  const double eps = 0.3, t = 0.45;
  CHECK(band2.directional_rescaled(xi, eps, t) ==
        doctest::Approx(band2.eval_rescaled(eps, {t * xi[0], t * xi[1]}) * t));
}

TEST_CASE("non-degeneracy constants") {
  const Kernel b1(KernelSpec::band(1, 2, 1, 1));
  const auto c1 = nondegeneracy_constants(b1, default_directions(1));
  CHECK(c1.gamma_J == 2.0);
  CHECK(c1.delta_J == 1.0);
  CHECK(c1.alpha[0] == 1.0);
  CHECK(c1.beta[0] == 2.0);
  REQUIRE(c1.remark_c_J.has_value());
  CHECK(*c1.remark_c_J == doctest::Approx(0.5));
  CHECK(c1.c_J == doctest::Approx(1.0).epsilon(1e-12));

  const Kernel b2(KernelSpec::band(1, 2, 1, 2));
  const auto c2 = nondegeneracy_constants(b2, default_directions(2));
  CHECK(*c2.remark_c_J == doctest::Approx(3.0 / 8.0));
  CHECK(c2.c_J == doctest::Approx(std::log(2.0)).epsilon(1e-10));

  // Gagliardo with a forced window [1,2]: ∫_1^2 t^{1+2s} dt in n = 1.
  const Kernel g(KernelSpec::gagliardo(0.75, 1));
  const auto cg = nondegeneracy_constants(g, default_directions(1), std::array<double, 2>{1.0, 2.0});
  CHECK(cg.c_J == doctest::Approx((std::pow(2.0, 3.5) - 1.0) / 3.5).epsilon(1e-10));

  // Re-verify (J1a)/(J2) on 16 random directions with an independent midpoint rule.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::vector<Vec2> dirs;
  for (int i = 0; i < 16; ++i) {
    double a = nd(rng), b = nd(rng), l = std::hypot(a, b);
    dirs.push_back({a / l, b / l});
  }
  for (const auto& spec : {KernelSpec::band(1, 2, 1, 2), KernelSpec::smooth_bump(2, 1, 2),
                           KernelSpec::gagliardo(0.75, 2)}) {
    const Kernel k(spec);
    const auto c = nondegeneracy_constants(k, dirs);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      CHECK(-c.gamma_J <= c.alpha[i]);
      CHECK(c.alpha[i] + c.delta_J <= c.beta[i] + 1e-15);
      CHECK(c.beta[i] <= c.gamma_J);
      const int m = 20000;
      double acc = 0.0;
      const double dt = (c.beta[i] - c.alpha[i]) / m;
      for (int j = 0; j < m; ++j) acc += dt / k.directional(dirs[i], c.alpha[i] + (j + 0.5) * dt);
      CHECK(acc <= c.c_J * (1 + 1e-6));
    }
  }
}

TEST_CASE("degenerate window is rejected") {
  const Kernel b(KernelSpec::band(1, 2, 1, 1));
  CHECK_THROWS_AS(nondegeneracy_constants(b, default_directions(1), std::array<double, 2>{0.5, 1.5}),
                  DegenerateKernelError);
}

TEST_CASE("band stencil at eps = h") {
  const Kernel b(KernelSpec::band(1, 2, 1, 1));
  const double h = 0.01;
  const auto st = discrete_stencil(b, h, {h, h});
  CHECK(st.max_extent(0) <= 2);
  CHECK(st.weight_sum() == doctest::Approx(2.0).epsilon(1e-3));
  for (std::size_t i = 0; i < st.offsets.size(); ++i) CHECK(st.offsets[i] != std::array<int, 2>{0, 0});
  // Invariance at fixed ε/h.
  const auto st2 = discrete_stencil(b, 0.37, {0.37 / 3.3, 0.37 / 3.3});
  const auto st3 = discrete_stencil(b, 0.05, {0.05 / 3.3, 0.05 / 3.3});
  CHECK(st2.weight_sum() == doctest::Approx(st3.weight_sum()).epsilon(1e-12));
}

TEST_CASE("stencil symmetry and mass") {
  for (const auto& spec : {KernelSpec::band(1, 2, 1, 2), KernelSpec::smooth_bump(2, 1, 2)}) {
    const Kernel k(spec);
    const auto st = discrete_stencil(k, 0.1, {0.02, 0.02});
    CHECK(st.captured_mass_fraction >= 1 - 1e-6);
    for (std::size_t i = 0; i < st.offsets.size(); ++i) {
      const std::array<int, 2> neg{-st.offsets[i][0], -st.offsets[i][1]};
      bool found = false;
      for (std::size_t j = 0; j < st.offsets.size(); ++j)
        if (st.offsets[j] == neg) {
          found = true;
          CHECK(st.weights[j] == st.weights[i]);
        }
      CHECK(found);
    }
  }
}

TEST_CASE("stencil mass approaches ∫J as eps/h grows") {
  const Kernel k(KernelSpec::smooth_bump(2, 1, 2));
  const double mass = k.mass();
  double prev = 1e9;
  for (double ratio : {2.0, 4.0, 8.0, 16.0}) {
    const auto st = discrete_stencil(k, 1.0, {1.0 / ratio, 1.0 / ratio});
    const double err = std::abs(st.weight_sum() - mass) / mass;
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("gagliardo near-diagonal cell weights") {
  const Kernel g(KernelSpec::gagliardo(0.75, 2));
  const double eps = 0.1, h = 0.05;
  StencilOptions o;
  o.max_radius = 0.3;
  const auto st = discrete_stencil(g, eps, {h, h}, o);
  for (std::size_t i = 0; i < st.offsets.size(); ++i) {
    const auto& d = st.offsets[i];
    if (std::max(std::abs(d[0]), std::abs(d[1])) != 1) continue;
    Box cell{2, {(d[0] - 0.5) * h, (d[1] - 0.5) * h}, {(d[0] + 0.5) * h, (d[1] + 0.5) * h}};
    const double ref =
        uniform_cubature([&](const Vec2& x) { return g.eval_rescaled(eps, x); }, cell, 16);
    CHECK(std::isfinite(st.weights[i]));
    CHECK(std::abs(st.weights[i] - ref) / ref < 1e-3);
  }
}
