#include <cmath>
#include <random>

#include "doctest.h"
#include "nlch/errors.hpp"
#include "nlch/solver.hpp"

using namespace nlch;

namespace {

Grid fixed_line(int n, double lo, double hi) {
  GridSpec s;
  s.dim = 1;
  s.nodes = {n, 1};
  s.extent = {hi - lo, 1};
  s.origin = {lo, 0};
  s.boundary = {Boundary::fixed, Boundary::fixed};
  return Grid::cartesian(s);
}

struct Setup {
  Grid grid;
  EnergyModel model;
  ConstraintSpec cons;
  Field f0;
};

Setup profile_setup(int n, double eps) {
  Grid g = fixed_line(n, -2, 2);
  EnergyModel m(g, Potential::quartic(), Kernel(KernelSpec::band(1, 2, 1, 1)), eps);
  auto cons = ConstraintSpec::profile({1, 0}, 1.9);
  Field f0 = project_constraints(
      Field::from_function(g, [&](const Vec2& x) { return std::tanh(x[0] / eps); }), cons);
  return {g, std::move(m), cons, f0};
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.grad_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.step_rule = StepRule::fixed;
  c.fixed_step = -1;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.clamp = 0.5;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("pins and constraint checks") {
  const Grid g = fixed_line(41, -2, 2);
  auto cons = ConstraintSpec::profile({1, 0}, 1.0);
  cons.pins.push_back({{1, 0}, -0.05, 0.05, 0.25});
  const auto pv = pinned_values(g, cons);
  int plus = 0, minus = 0, mid = 0, free = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.position(i)[0];
    if (std::isnan(pv[i])) {
      ++free;
      CHECK(std::abs(x) < 1.0);
    } else if (pv[i] == 1.0) {
      ++plus;
      CHECK(x >= 1.0 - 1e-12);
    } else if (pv[i] == -1.0) {
      ++minus;
    } else {
      ++mid;
      CHECK(pv[i] == 0.25);
    }
  }
  // x = 1.0, 1.1, ..., 2.0 and mirror; x = 0 only in the middle band.
  CHECK(plus == 11);
  CHECK(minus == 11);
  CHECK(mid == 1);
  CHECK(free == 41 - 23);

  Field f(g, 0.0);
  CHECK_THROWS_AS(check_constraints(f, cons), ConstraintError);
  const Field p = project_constraints(f, cons);
  CHECK_NOTHROW(check_constraints(p, cons));
  CHECK_NOTHROW(check_constraints(f, ConstraintSpec::free_field()));
  CHECK_THROWS_AS(ConstraintSpec::profile({1, 0}, 0.0), ParameterError);
}

TEST_CASE("energy_and_gradient agrees with energy_total and energy_j") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  GridSpec s;
  s.dim = 2;
  s.nodes = {24, 20};
  s.boundary = {Boundary::periodic, Boundary::fixed};
  const Grid g = Grid::cartesian(s);
  EnergyModel m(g, Potential::quartic(), Kernel(KernelSpec::band(1, 2, 1, 2)), 0.1);
  for (int trial = 0; trial < 3; ++trial) {
    Field f(g);
    for (auto& v : f.values) v = u(rng);
    const auto eg = energy_and_gradient(f, m);
    const double jd = energy_j(f, m, full_mask(g), full_mask(g), JPath::direct);
    CHECK(eg.report.j_term == doctest::Approx(jd).epsilon(1e-11));
    CHECK(eg.report.total == doctest::Approx(energy_total(f, m).total).epsilon(1e-11));
  }
}

TEST_CASE("minimize: one-transition profile") {
  auto s = profile_setup(513, 0.1);
  SolverConfig cfg;
  const auto r = minimize(s.f0, s.model, s.cons, cfg);
  REQUIRE(r.converged);
  CHECK(r.iterations < 500);
  CHECK_NOTHROW(check_constraints(r.field, s.cons));
  CHECK(count_transitions(r.field.values) == 1);
  // Accepted steps never increase the energy beyond round-off.
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    CHECK(r.trace[i].energy <= r.trace[i - 1].energy + 1e-12 * (1 + std::abs(r.trace[i - 1].energy)));
  CHECK(r.report.total == doctest::Approx(energy_total(r.field, s.model).total).epsilon(1e-12));
  // Odd symmetry of the problem is inherited by the minimizer.
  const std::size_t n = r.field.size();
  for (std::size_t i = 0; i < n; ++i) CHECK(r.field[i] == doctest::Approx(-r.field[n - 1 - i]).epsilon(1e-5));
}

TEST_CASE("minimize: preconditioner does not change the minimizer") {
  auto s = profile_setup(129, 0.25);
  SolverConfig a;
  const auto ra = minimize(s.f0, s.model, s.cons, a);
  SolverConfig b;
  b.precondition = false;
  b.max_iters = 200000;
  b.grad_tol = 1e-6;
  const auto rb = minimize(s.f0, s.model, s.cons, b);
  REQUIRE(ra.converged);
  CHECK(rb.report.total == doctest::Approx(ra.report.total).epsilon(1e-6));
}

TEST_CASE("minimize: deterministic and fixed-step rule") {
  auto s = profile_setup(257, 0.2);
  SolverConfig cfg;
  const auto r1 = minimize(s.f0, s.model, s.cons, cfg);
  const auto r2 = minimize(s.f0, s.model, s.cons, cfg);
  CHECK(r1.report.total == r2.report.total);
  CHECK(r1.field.values == r2.field.values);

  SolverConfig fx;
  fx.step_rule = StepRule::fixed;
  fx.fixed_step = 0.5;
  fx.max_iters = 50;
  const auto rf = minimize(s.f0, s.model, s.cons, fx);
  CHECK(rf.report.total < energy_total(s.f0, s.model).total);
  CHECK(rf.iterations <= 50);
  CHECK(trace_csv(rf.trace).rfind("iter,energy,grad_norm,step\n", 0) == 0);
}

TEST_CASE("minimize rejects a start that violates the pins") {
  auto s = profile_setup(65, 0.2);
  CHECK_THROWS_AS(minimize(Field(s.grid, 0.0), s.model, s.cons, SolverConfig{}), ConstraintError);
}
