#include "nlch/selftest.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "nlch/interface.hpp"
#include "nlch/solver.hpp"

namespace nlch {

namespace {

class Checks {
 public:
  void close(const std::string& name, double got, double want, double tol = 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "got " << got << ", want " << want;
    out.push_back({name, std::abs(got - want) <= tol * std::max(1.0, std::abs(want)), os.str()});
  }
  void truth(const std::string& name, bool ok, const std::string& detail = {}) {
    out.push_back({name, ok, detail});
  }
  std::vector<SelfCheck> out;
};

Grid periodic_box(int dim, int n) {
  GridSpec s;
  s.dim = dim;
  s.nodes = {n, dim == 2 ? n : 1};
  return Grid::cartesian(s);
}

Grid fixed_line(int n, double lo, double hi) {
  GridSpec s;
  s.dim = 1;
  s.nodes = {n, 1};
  s.extent = {hi - lo, 1.0};
  s.origin = {lo, 0.0};
  s.boundary = {Boundary::fixed, Boundary::fixed};
  return Grid::cartesian(s);
}

}  // namespace

std::vector<SelfCheck> run_selftest() {
  Checks c;
  const Kernel band1(KernelSpec::band(1, 2, 1, 1));
  const Kernel band2(KernelSpec::band(1, 2, 1, 2));
  c.close("kernel band(1,2,1) at 1.5", band1.eval({1.5, 0}), 1.0);
  c.close("kernel band(1,2,1) at 0.5", band1.eval({0.5, 0}), 0.0);
  c.close("rescaled kernel eps=0.5 at 0.75", band1.eval_rescaled(0.5, {0.75, 0}), 2.0);
  c.close("rescaled kernel eps=1", band1.eval_rescaled(1.0, {1.3, 0}), band1.eval({1.3, 0}));
  c.close("moment band(1,2,3)", Kernel(KernelSpec::band(1, 2, 3, 1)).moment(), 9.0, 1e-9);
  c.close("directional n=2 at 1.5", band2.directional({0.6, 0.8}, 1.5), 1.5);
  c.close("directional n=1 equals J", band1.directional({1, 0}, 1.7), band1.eval({1.7, 0}));

  const Potential w = Potential::quartic();
  c.close("W(1)", w(1.0), 0.0);
  c.close("W(0)", w(0.0), 1.0);
  c.close("W(2)", w(2.0), 9.0);
  c.close("W'(1)", w.derivative(1.0).value, 0.0);
  c.close("W'(0)", w.derivative(0.0).value, 0.0);

  {
    const Field f(periodic_box(2, 16), 0.7);
    const auto g = gradient(f);
    double m = 0.0;
    for (const auto& comp : g.components)
      for (double v : comp) m = std::max(m, std::abs(v));
    c.close("gradient of a constant", m, 0.0);
  }
  {
    std::vector<double> s;
    for (int i = 0; i <= 400; ++i) s.push_back(std::tanh((-1.0 + i / 200.0) / 0.05));
    c.truth("transitions of tanh(t/0.05)", count_transitions(s) == 1);
    c.truth("transitions of a constant", count_transitions(std::vector<double>(50, 1.0)) == 0);
  }
  {
    const Grid g = fixed_line(5, 0, 1);
    const Field f(g, std::vector<double>{2.0, -0.3, 0.9, -1.0, -4.0});
    const Field t = truncate_unit(f);
    c.close("truncate 2", t[0], 1.0);
    c.close("truncate -0.3", t[1], -0.3);
    c.truth("truncate is idempotent", truncate_unit(t).values == t.values);
  }
  {
    const Grid g = periodic_box(2, 32);
    c.close("W term of u=0, eps=0.1", energy_w(Field(g, 0.0), w, 0.1, full_mask(g)), 10.0, 1e-12);
    const EnergyModel model(g, w, band2, 0.1);
    c.close("energy of u=-1", energy_total(Field(g, -1.0), model).total, 0.0);
    const Field f = Field::from_function(g, [](const Vec2& x) {
      return std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * x[1]);
    });
    const auto r = energy_total(f, model);
    c.close("total = W term + J term", r.total, r.w_term + r.j_term, 1e-15);
    const auto gr = energy_gradient(Field(g, 1.0), model);
    double m = 0.0;
    for (double v : gr) m = std::max(m, std::abs(v));
    c.close("gradient at u=1", m, 0.0);
  }
  {
    const Grid g = fixed_line(65, -1, 1);
    const EnergyModel model(g, w, band1, 0.25);
    const auto res = minimize(Field(g, 1.0), model, ConstraintSpec::free_field(), SolverConfig{});
    c.truth("minimize from u=1 converges at once", res.converged && res.iterations == 0);
    c.close("minimum energy from u=1", res.report.total, 0.0);
    const auto cons = ConstraintSpec::profile({1, 0}, 0.5);
    const Field f = Field::from_function(g, [](const Vec2& x) { return x[0]; });
    const Field p1 = project_constraints(f, cons);
    c.truth("projection is idempotent", project_constraints(p1, cons).values == p1.values);
    c.truth("free projection is the identity",
            project_constraints(f, ConstraintSpec::free_field()).values == f.values);
  }
  {
    const Grid g = fixed_line(101, -1, 1);
    const Field f = Field::from_function(g, [](const Vec2& x) { return std::cos(x[0]); });
    c.truth("blend of equal fields", blend(f, f, 0.1).values == f.values);
    c.close("sliced energy of a constant",
            energy_sliced_1d(std::vector<double>(200, 1.0), 0.01, w, band1, {1, 0}, 0.1), 0.0);
  }
  return c.out;
}

}  // namespace nlch
