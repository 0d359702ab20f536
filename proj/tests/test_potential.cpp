#include <cmath>
#include <random>

#include "doctest.h"
#include "nlch/errors.hpp"
#include "nlch/potential.hpp"

using namespace nlch;

TEST_CASE("quartic values and derivative") {
  const auto W = Potential::quartic(1.0);
  CHECK(W(1.0) == 0.0);
  CHECK(W(-1.0) == 0.0);
  CHECK(W(0.0) == 1.0);
  CHECK(W(2.0) == 9.0);
  CHECK(W.derivative(1.0).value == 0.0);
  CHECK(W.derivative(0.0).value == 0.0);
  CHECK(W.derivative(0.5).value == doctest::Approx(-1.5));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng), h = 1e-5;
    const double fd = (W(s + h) - W(s - h)) / (2 * h);
    const double d = W.derivative(s).value;
    CHECK(std::abs(fd - d) <= 1e-8 * std::max(1.0, std::abs(d)));
  }
}

TEST_CASE("quartic growth constants") {
  const auto g = Potential::quartic(1.0).growth_constants();
  CHECK(g.c_W == doctest::Approx(1.1).epsilon(1e-8));
  CHECK(g.m_W == doctest::Approx(9.0 / 16.0).epsilon(1e-12));
  CHECK(g.M_W == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.s0 == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-10));
  CHECK(g.hat_c_W == doctest::Approx(2 * 1.1 + 4.0 / (9.0 / 16.0)).epsilon(1e-8));
  CHECK(g.a_W == doctest::Approx(0.999));
}

TEST_CASE("growth inequalities on a dense grid") {
  const auto W = Potential::quartic(1.0);
  const auto g = W.growth_constants();
  for (int i = 0; i <= 10000; ++i) {
    const double s = -5.0 + 10.0 * i / 10000;
    const double gap = std::abs(s) - 1.0;
    CHECK(gap * gap <= g.c_W * W(s) + 1e-15);
    if (std::abs(s + 1.0) >= 0.5) CHECK((s - 1) * (s - 1) <= g.hat_c_W * W(s) + 1e-12);
    if (std::abs(s - 1.0) >= 0.5) CHECK((s + 1) * (s + 1) <= g.hat_c_W * W(s) + 1e-12);
    const double c = std::clamp(s, -1.0, 1.0);
    CHECK(W(c) <= W(s) + g.M_W);
  }
}

TEST_CASE("custom piecewise potential") {
  const auto W = Potential::custom_piecewise({{-2, 1}, {-1, 0}, {0, 0.5}, {1, 0}, {2, 1}});
  CHECK(W(0.0) == 0.5);
  CHECK(W(0.5) == doctest::Approx(0.25));
  CHECK(W.derivative(0.0).one_sided);
  CHECK_FALSE(W.derivative(0.5).one_sided);
  const auto g = W.growth_constants();
  CHECK(g.c_W > 0);
  CHECK_THROWS_AS(Potential::custom_piecewise({{-2, 1}, {-1, 0}, {0, 0}, {1, 0}, {2, 1}}),
                  ParameterError);
  CHECK_THROWS_AS(Potential::quartic(0.0), ParameterError);
}
