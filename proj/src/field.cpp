#include "nlch/field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "nlch/errors.hpp"

namespace nlch {

Field::Field(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) throw ParameterError("field size does not match its grid");
}

Field Field::from_function(const Grid& g, const std::function<double(const Vec2&)>& f) {
  Field out(g);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = f(g.position(i));
  return out;
}

VectorField gradient(const Field& f) {
  VectorField out{f.grid, {}};
  GradientOperator(f.grid).apply(f.values, out.components);
  return out;
}

Field truncate_unit(const Field& f) {
  Field out = f;
  for (double& v : out.values) v = std::clamp(v, -1.0, 1.0);
  return out;
}

namespace {

// Continuous index coordinates of a physical point.
std::array<double, 2> index_coords(const Grid& g, const Vec2& x) {
  if (g.is_skew()) {
    const auto& s = *g.skew();
    const double i = x[0] / s.h, j = x[1] / s.h;
    const double k = s.p * i + s.q * j;
    const double n2 = static_cast<double>(s.p) * s.p + static_cast<double>(s.q) * s.q;
    const double t = ((i - k * s.a) * s.q - (j - k * s.b) * s.p) / n2;
    return {t, k + s.kmax};
  }
  const Vec2 o = g.position(0);
  std::array<double, 2> c{(x[0] - o[0]) / g.spacing(0), 0.0};
  if (g.dim() == 2) c[1] = (x[1] - o[1]) / g.spacing(1);
  return c;
}

}  // namespace

double interpolate(const Field& f, const Vec2& x) {
  const Grid& g = f.grid;
  auto c = index_coords(g, x);
  std::array<int, 2> base{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int a = 0; a < 2; ++a) {
    const int n = g.shape()[a];
    if (n == 1) continue;
    double v = c[a];
    if (g.periodic(a)) {
      v = std::fmod(v, static_cast<double>(n));
      if (v < 0) v += n;
    } else {
      v = std::clamp(v, 0.0, static_cast<double>(n - 1));
    }
    int b = static_cast<int>(std::floor(v));
    double t = v - b;
    if (!g.periodic(a) && b >= n - 1) {
      b = n - 2;
      t = 1.0;
    }
    // Snap to a node when within round-off of it.
    if (t < 1e-10) t = 0.0;
    if (t > 1.0 - 1e-10) {
      t = 0.0;
      b += 1;
      if (g.periodic(a)) b %= n;
    }
    base[a] = b;
    frac[a] = t;
  }
  double acc = 0.0;
  for (int dx = 0; dx < 2; ++dx) {
    const double wx = dx ? frac[0] : 1.0 - frac[0];
    if (wx == 0.0) continue;
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? frac[1] : 1.0 - frac[1];
      if (wy == 0.0) continue;
      std::size_t idx;
      g.shifted(g.index(base[0], base[1]), {dx, dy}, idx);
      acc += wx * wy * f.values[idx];
    }
  }
  return acc;
}

Slice slice_extract(const Field& f, const Vec2& xi, const Vec2& z) {
  const Grid& g = f.grid;
  if (g.is_skew()) throw ParameterError("slice_extract requires a Cartesian grid");
  Slice out;
  const int n = g.dim();
  const double xn = n == 1 ? std::abs(xi[0]) : std::hypot(xi[0], xi[1]);
  if (std::abs(xn - 1.0) > 1e-12) throw ParameterError("slice direction must be a unit vector");

  // Domain box (periodic axes are treated as [origin, origin + (N-1)h]).
  const Vec2 lo = g.position(0);
  const Vec2 hi = g.position(g.size() - 1);

  double step = 0.0;
  if (n == 1) {
    step = g.spacing(0);
  } else {
    const bool axis = std::abs(xi[0]) < 1e-14 || std::abs(xi[1]) < 1e-14;
    const bool diag = std::abs(std::abs(xi[0]) - std::abs(xi[1])) < 1e-14 &&
                      std::abs(g.spacing(0) - g.spacing(1)) < 1e-14 * g.spacing(0);
    if (axis)
      step = std::abs(xi[0]) > 0.5 ? g.spacing(0) : g.spacing(1);
    else if (diag)
      step = g.spacing(0) * std::sqrt(2.0);
    else
      step = std::min(g.spacing(0), g.spacing(1));
  }
  out.step = step;

  // Parameter range of the line inside the box.
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    if (std::abs(xi[a]) < 1e-14) {
      if (z[a] < lo[a] - 1e-12 || z[a] > hi[a] + 1e-12) return out;
      continue;
    }
    double t0 = (lo[a] - z[a]) / xi[a], t1 = (hi[a] - z[a]) / xi[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
  }
  if (!(tmax >= tmin)) return out;

  // Phase of the samples: the first t >= tmin at which the line crosses a node
  // coordinate of the first axis it is not parallel to.
  const double tol = 1e-9;
  double shift = 0.0;
  for (int a = 0; a < n; ++a) {
    if (std::abs(xi[a]) < 1e-14) continue;
    const double c = (z[a] + tmin * xi[a] - lo[a]) / g.spacing(a);
    const double frac = xi[a] > 0 ? std::ceil(c - tol) - c : c - std::floor(c + tol);
    shift = std::max(0.0, frac) * g.spacing(a) / std::abs(xi[a]);
    break;
  }
  const double t_start = tmin + shift;
  for (double t = t_start; t <= tmax + tol * step; t += step) {
    const Vec2 x{z[0] + t * xi[0], n == 2 ? z[1] + t * xi[1] : 0.0};
    bool on_node = true;
    for (int a = 0; a < n; ++a) {
      const double c = (x[a] - lo[a]) / g.spacing(a);
      if (std::abs(c - std::round(c)) > 1e-7) on_node = false;
    }
    out.approximate |= !on_node;
    out.t.push_back(t);
    out.values.push_back(interpolate(f, x));
  }
  return out;
}

int count_transitions(const std::vector<double>& samples) {
  // Classes: -1 for u <= -1/2, +1 for u >= 1/2, 0 strictly inside the band.
  // Consecutive outside samples of opposite class bracket exactly one transition of
  // the piecewise-linear interpolant.
  int last = 0;
  int count = 0;
  for (double v : samples) {
    const int c = v <= -0.5 ? -1 : (v >= 0.5 ? 1 : 0);
    if (c == 0) continue;
    if (last != 0 && c != last) ++count;
    last = c;
  }
  return count;
}

void write_field_csv(std::ostream& os, const Field& f) {
  const int n = f.grid.dim();
  os << (n == 1 ? "x,value\n" : "x,y,value\n");
  os << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec2 p = f.grid.position(i);
    os << p[0] << ',';
    if (n == 2) os << p[1] << ',';
    os << f.values[i] << '\n';
  }
}

Field read_field_csv(std::istream& is, const Grid& grid) {
  std::string line;
  if (!std::getline(is, line)) throw ParameterError("field CSV is empty");
  const int n = grid.dim();
  const std::string expect = n == 1 ? "x,value" : "x,y,value";
  if (line != expect) throw ParameterError("field CSV header must be '" + expect + "'");
  Field out(grid);
  std::size_t i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (i >= grid.size()) throw ParameterError("field CSV has more rows than grid nodes");
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ls, cell, ',')) cols.push_back(std::stod(cell));
    if (static_cast<int>(cols.size()) != n + 1) throw ParameterError("field CSV row has wrong arity");
    const Vec2 p = grid.position(i);
    for (int a = 0; a < n; ++a)
      if (std::abs(cols[a] - p[a]) > 1e-9 * std::max(1.0, std::abs(p[a])))
        throw ParameterError("field CSV coordinates do not match the grid at row " +
                             std::to_string(i + 2));
    out.values[i] = cols[n];
    ++i;
  }
  if (i != grid.size()) throw ParameterError("field CSV has fewer rows than grid nodes");
  return out;
}

}  // namespace nlch
