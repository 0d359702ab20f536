#include "nlch/interface.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "nlch/errors.hpp"

namespace nlch {

namespace {

constexpr int kTableIntervals = 1024;

double bump(double rho2) { return rho2 < 1.0 ? std::exp(-1.0 / (1.0 - rho2)) : 0.0; }

}  // namespace

double Mollifier::raw_marginal(double t) const {
  const double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  if (dim_ == 1) return bump(t2);
  const double L = std::sqrt(1.0 - t2);
  auto f = [t2](double y) { return bump(t2 + y * y); };
  return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, L, 0);
}

Mollifier::Mollifier(int dim) : dim_(dim) {
  if (dim != 1 && dim != 2) throw ParameterError("mollifier dimension must be 1 or 2");
  dx_ = 1.0 / kTableIntervals;
  table_.assign(kTableIntervals + 1, 0.0);
  slope_.assign(kTableIntervals + 1, 0.0);
  auto m = [this](double t) { return raw_marginal(t); };
  double acc = 0.0;
  for (int i = 0; i < kTableIntervals; ++i) {
    slope_[i] = raw_marginal(i * dx_);
    acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(m, i * dx_, (i + 1) * dx_, 0);
    table_[i + 1] = acc;
  }
  slope_[kTableIntervals] = 0.0;
  // Half of the unit mass lies on each side of the midplane.
  norm_ = 0.5 / acc;
  for (auto& v : table_) v *= norm_;
  for (auto& v : slope_) v *= norm_;
}

double Mollifier::marginal(double t) const { return norm_ * raw_marginal(t); }

double Mollifier::profile(double r) const {
  r = std::clamp(r, 0.0, 1.0);
  const int i = std::min(static_cast<int>(r / dx_), kTableIntervals - 1);
  const double x0 = i * dx_;
  const double u = (r - x0) / dx_;
  const double y0 = table_[i], y1 = table_[i + 1];
  const double d0 = slope_[i] * dx_, d1 = slope_[i + 1] * dx_;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * y1 +
         (u3 - u2) * d1;
}

double Mollifier::step(double t) const {
  if (t >= 1.0) return 1.0;
  if (t <= -1.0) return -1.0;
  if (t == 0.0) return 0.0;
  const double v = 2.0 * profile(std::abs(t));
  return t > 0 ? v : -v;
}

const Mollifier& Mollifier::get(int dim) {
  static const Mollifier one(1);
  static const Mollifier two(2);
  if (dim == 1) return one;
  if (dim == 2) return two;
  throw ParameterError("mollifier dimension must be 1 or 2");
}

Field mollified_interface(const Grid& grid, const InterfaceSpec& spec) {
  const int n = grid.dim();
  const double len = n == 1 ? std::abs(spec.normal[0]) : std::hypot(spec.normal[0], spec.normal[1]);
  if (std::abs(len - 1.0) > 1e-12) throw ParameterError("interface normal must be a unit vector");
  const double h = std::max(grid.spacing(0), n == 2 ? grid.spacing(1) : 0.0);
  if (!(spec.sigma > 2.0 * h))
    throw ParameterError("mollification width sigma must exceed 2h to be resolved");
  const Mollifier& mol = Mollifier::get(n);
  Field out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec2 x = grid.position(i);
    const double d = x[0] * spec.normal[0] + (n == 2 ? x[1] * spec.normal[1] : 0.0) - spec.offset;
    out.values[i] = mol.step(d / spec.sigma);
  }
  return out;
}

Field blend_cutoff(const Grid& grid, double delta) {
  if (!(delta > 0.0)) throw ParameterError("blend margin must be > 0");
  // Per fixed index axis: distance of node i to the two ends, in physical units.
  std::array<double, 2> unit{grid.spacing(0), grid.spacing(1)};
  if (grid.is_skew()) unit[1] = grid.skew()->normal_spacing;
  for (int a = 0; a < grid.dim(); ++a) {
    if (grid.periodic(a)) continue;
    const double extent = (grid.shape()[a] - 1) * unit[a];
    if (!(delta < 0.5 * extent)) throw ParameterError("blend margin must be below half the extent");
  }
  const Mollifier& mol = Mollifier::get(1);
  Field phi(grid, 1.0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const auto c = grid.coords(i);
    double v = 1.0;
    for (int a = 0; a < grid.dim(); ++a) {
      if (grid.periodic(a)) continue;
      const double d = std::min(c[a], grid.shape()[a] - 1 - c[a]) * unit[a];
      v *= mol.ramp((d - 1.5 * delta) / (0.5 * delta));
    }
    phi.values[i] = v;
  }
  return phi;
}

Field blend(const Field& inner, const Field& outer, double delta) {
  if (!(inner.grid == outer.grid)) throw ParameterError("blend fields must share a grid");
  const Field phi = blend_cutoff(inner.grid, delta);
  Field out(inner.grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p = phi.values[i];
    if (p == 1.0 || inner.values[i] == outer.values[i])
      out.values[i] = inner.values[i];
    else if (p == 0.0)
      out.values[i] = outer.values[i];
    else
      out.values[i] = p * inner.values[i] + (1.0 - p) * outer.values[i];
  }
  return out;
}

}  // namespace nlch
