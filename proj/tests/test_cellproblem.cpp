#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "nlch/cellproblem.hpp"
#include "nlch/errors.hpp"
#include "nlch/interface.hpp"

using namespace nlch;

namespace {

const Potential W = Potential::quartic();

CellResolution res_npe(double npe) {
  CellResolution r;
  r.nodes_per_eps = npe;
  return r;
}

}  // namespace

TEST_CASE("cell energy matches the energy on an extended line") {
  const Kernel k(KernelSpec::band(1, 2, 1, 1));
  const double eps = 0.1;
  CellProblem cell(W, k, {1, 0}, eps, res_npe(16));
  // Smoothed sign, exactly ±1 beyond |x| = 1/4.
  auto v = [](double x) { return Mollifier::get(1).step(x / 0.25); };
  const Field fc = Field::from_function(cell.grid(), [&](const Vec2& x) { return v(x[0]); });
  const CellEnergy ec = cell.energy(fc);
  CHECK_FALSE(ec.narrow_strip);

  const double h = cell.grid().spacing(0);
  const Grid wide = Grid::line(h, 3.0);
  EnergyModel m(wide, W, k, eps);
  const Field fw = Field::from_function(wide, [&](const Vec2& x) { return v(x[0]); });
  CHECK(ec.value == doctest::Approx(energy_total(fw, m).total).epsilon(1e-6));
}

TEST_CASE("cell energy rejects fields outside the constraint set") {
  const Kernel k(KernelSpec::band(1, 2, 1, 1));
  CellProblem cell(W, k, {1, 0}, 0.1, res_npe(8));
  CHECK_THROWS_AS(cell.energy(Field(cell.grid(), 1.0)), ConstraintError);
  CHECK_THROWS_AS(CellProblem(W, k, {1, 0}, 1.0), ParameterError);
  CHECK_THROWS_AS(CellProblem(W, k, {1, 1}, 0.1), ParameterError);
  const Kernel k2(KernelSpec::band(1, 2, 1, 2));
  CHECK_THROWS_AS(CellProblem(W, k2, {2, 2}, 0.1), ParameterError);
}

TEST_CASE("2D cell energy under tangential refinement") {
  const Kernel k(KernelSpec::band(1, 2, 1, 2));
  const double eps = 0.1;
  for (LatticeDirection d : {LatticeDirection{1, 0}, LatticeDirection{1, 1}}) {
    auto flat = [&](const CellProblem& c) {
      const Vec2 nu = c.normal();
      Field f = Field::from_function(c.grid(), [&](const Vec2& x) {
        return Mollifier::get(1).step((x[0] * nu[0] + x[1] * nu[1]) / 0.3);
      });
      return c.energy(f).value;
    };
    CellResolution a, b;
    a.tangential_nodes = 0;
    b.tangential_nodes = 0;
    a.nodes_per_eps = 6;
    b.nodes_per_eps = 12;
    const double ea = flat(CellProblem(W, k, d, eps, a));
    const double eb = flat(CellProblem(W, k, d, eps, b));
    CHECK(std::abs(ea - eb) / eb < 0.01);
  }
}

TEST_CASE("2D flat profile energy does not depend on the tangential period") {
  const Kernel k(KernelSpec::band(1, 2, 1, 2));
  CellResolution a, b;
  a.nodes_per_eps = b.nodes_per_eps = 8;
  // j = 4 and j = 2 periods per unit length: the same h.
  a.tangential_nodes = 5;
  b.tangential_nodes = 10;
  CellProblem ca(W, k, {1, 2}, 0.2, a), cb(W, k, {1, 2}, 0.2, b);
  CHECK(ca.tangential_period() != cb.tangential_period());
  CHECK(ca.grid().spacing(0) == doctest::Approx(cb.grid().spacing(0)));
  auto flat = [](const CellProblem& c) {
    const Vec2 nu = c.normal();
    return c.energy(Field::from_function(c.grid(), [&](const Vec2& x) {
      return std::clamp(2.5 * (x[0] * nu[0] + x[1] * nu[1]), -1.0, 1.0);
    })).value;
  };
  CHECK(flat(ca) == doctest::Approx(flat(cb)).epsilon(1e-10));
}

TEST_CASE("solve_profile: deterministic, monotone, convergent in resolution") {
  const Kernel k(KernelSpec::band(1, 2, 1, 1));
  const auto a = solve_profile({1, 0}, 0.1, W, k, res_npe(16), SolverConfig{});
  const auto b = solve_profile({1, 0}, 0.1, W, k, res_npe(16), SolverConfig{});
  REQUIRE(a.converged);
  CHECK(a.energy == b.energy);

  // Monotone through the core. The tails overshoot the wells and decay with
  // oscillation, as for fourth-order profiles, so only the core is monotone.
  double top = 0.0;
  for (std::size_t i = 1; i < a.profile.size(); ++i) {
    top = std::max(top, std::abs(a.profile[i]));
    if (std::abs(a.profile[i]) < 0.95 && std::abs(a.profile[i - 1]) < 0.95)
      CHECK(a.profile[i] >= a.profile[i - 1] - 1e-6);
  }
  CHECK(top > 1.0);
  CHECK(top < 1.05);

  // Refinement changes the discrete functional itself, so the values are not nested;
  // they settle with shrinking increments.
  std::vector<double> e;
  for (double npe : {8.0, 16.0, 32.0, 64.0}) e.push_back(solve_profile({1, 0}, 0.1, W, k, res_npe(npe), SolverConfig{}).energy);
  for (std::size_t i = 2; i < e.size(); ++i) CHECK(std::abs(e[i] - e[i - 1]) < std::abs(e[i - 1] - e[i - 2]));
  CHECK(std::abs(e[3] - e[2]) / e[3] < 1e-3);
}

TEST_CASE("psi: sweep, nesting and evenness") {
  const Kernel k(KernelSpec::band(1, 2, 1, 1));
  PsiOptions o;
  const auto r = psi({1, 0}, W, k, o, res_npe(16), SolverConfig{});
  CHECK(r.eps_grid.size() == 12);
  CHECK(r.psi >= 0.0);
  CHECK(r.psi == *std::min_element(r.energies.begin(), r.energies.end()));
  REQUIRE(r.profile);
  CHECK_NOTHROW(check_constraints(*r.profile, ConstraintSpec::profile(r.nu, 0.5)));
  CHECK(r.narrow.back());  // ε = 0.5 squeezes the transition
  CHECK_FALSE(r.narrow.front());

  PsiOptions small;
  small.eps_grid = {0.1, 0.3};
  small.refine = 0;
  PsiOptions big = small;
  big.eps_grid.push_back(0.05);
  const auto rs = psi({1, 0}, W, k, small, res_npe(16), SolverConfig{});
  const auto rb = psi({1, 0}, W, k, big, res_npe(16), SolverConfig{});
  CHECK(rb.psi <= rs.psi);

  const auto rm = psi({-1, 0}, W, k, small, res_npe(16), SolverConfig{});
  CHECK(rm.psi == doctest::Approx(rs.psi).epsilon(2e-7));

  const std::string csv = psi_csv(r);
  std::istringstream is(csv);
  std::string line;
  int rows = 0;
  std::getline(is, line);
  CHECK(line == "nu_x,nu_y,epsilon,cell_energy,converged");
  std::string last;
  while (std::getline(is, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 13);
  CHECK(last.find(",min,") != std::string::npos);

  small.eps_grid = {1.5};
  CHECK_THROWS_AS(psi({1, 0}, W, k, small, res_npe(16), SolverConfig{}), ParameterError);
}

TEST_CASE("anisotropy table") {
  const Kernel k(KernelSpec::band(1, 2, 1, 2));
  PsiOptions o;
  o.eps_grid = {0.05};
  o.refine = 0;
  const std::vector<LatticeDirection> dirs{{1, 0}, {-1, 0}, {1, 1}, {-1, -1}};
  const auto t = anisotropy_table(dirs, W, k, o, res_npe(8), SolverConfig{});
  REQUIRE(t.size() == dirs.size());
  CHECK(t[0].psi == doctest::Approx(t[1].psi).epsilon(2e-7));
  CHECK(t[2].psi == doctest::Approx(t[3].psi).epsilon(2e-7));
  CHECK(std::abs(t[0].psi - t[2].psi) / t[0].psi < 0.01);

  const auto fine = anisotropy_table({{1, 0}}, W, k, o, res_npe(16), SolverConfig{});
  CHECK(std::abs(fine[0].psi - t[0].psi) / fine[0].psi < 0.02);

  std::istringstream is(anisotropy_csv(t));
  std::string line;
  int rows = -1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 4);
  CHECK_THROWS_AS(anisotropy_table(dirs, W, Kernel(KernelSpec::band(1, 2, 1, 1)), o, {}, {}),
                  ParameterError);
}
