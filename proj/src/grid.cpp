#include "nlch/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nlch/errors.hpp"

namespace nlch {

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "fixed"; }

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw ParameterError("grid dimension must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    const int min_nodes = boundary[a] == Boundary::fixed ? 3 : 2;
    if (nodes[a] < min_nodes) {
      std::ostringstream os;
      os << "grid axis " << a << " needs at least " << min_nodes << " nodes";
      throw ParameterError(os.str());
    }
    if (!(extent[a] > 0.0)) throw ParameterError("grid extent must be > 0");
  }
}

Grid Grid::cartesian(const GridSpec& spec) {
  spec.validate();
  Grid g;
  g.dim_ = spec.dim;
  g.spec_ = spec;
  for (int a = 0; a < 2; ++a) {
    if (a >= spec.dim) {
      g.shape_[a] = 1;
      g.periodic_[a] = false;
      g.spacing_[a] = 1.0;
      continue;
    }
    g.shape_[a] = spec.nodes[a];
    g.periodic_[a] = spec.boundary[a] == Boundary::periodic;
    g.spacing_[a] = g.periodic_[a] ? spec.extent[a] / spec.nodes[a]
                                   : spec.extent[a] / (spec.nodes[a] - 1);
    g.origin_[a] = spec.origin[a];
  }
  return g;
}

Grid Grid::line(double h, double halfwidth) {
  if (!(h > 0.0) || !(halfwidth > 0.0)) throw ParameterError("line grid needs h > 0 and halfwidth > 0");
  const int k = static_cast<int>(std::ceil(halfwidth / h - 1e-9));
  GridSpec s;
  s.dim = 1;
  s.nodes = {2 * k + 1, 1};
  s.extent = {2.0 * k * h, 1.0};
  s.origin = {-k * h, 0.0};
  s.boundary = {Boundary::fixed, Boundary::fixed};
  Grid g = cartesian(s);
  g.spacing_[0] = h;  // exact, not recomputed from the extent
  return g;
}

namespace {

// Returns (g, x, y) with p x + q y = g.
std::array<long, 3> ext_gcd(long p, long q) {
  if (q == 0) return {p, 1, 0};
  const auto [g, x, y] = ext_gcd(q, p % q);
  return {g, y, x - (p / q) * y};
}

}  // namespace

Grid Grid::skew_strip(int p, int q, int m, double halfwidth, double period) {
  if (p == 0 && q == 0) throw ParameterError("direction (p,q) must be nonzero");
  if (std::gcd(p, q) != 1) throw ParameterError("direction (p,q) must have gcd(p,q) = 1");
  if (m < 2) throw ParameterError("skew strip needs at least 2 tangential nodes");
  if (!(halfwidth > 0.0)) throw ParameterError("skew strip halfwidth must be > 0");
  if (!(period > 0.0)) throw ParameterError("skew strip period must be > 0");
  auto [gg, a, b] = ext_gcd(p, q);
  if (gg < 0) {
    a = -a;
    b = -b;
  }
  Skew sk;
  sk.p = p;
  sk.q = q;
  sk.m = m;
  sk.a = static_cast<int>(a);
  sk.b = static_cast<int>(b);
  const double len = std::hypot(static_cast<double>(p), static_cast<double>(q));
  sk.h = period / (m * len);
  sk.period = period;
  sk.normal = {p / len, q / len};
  sk.normal_spacing = sk.h / len;
  sk.kmax = static_cast<int>(std::ceil(halfwidth / sk.normal_spacing - 1e-9));

  Grid g;
  g.dim_ = 2;
  g.shape_ = {m, 2 * sk.kmax + 1};
  g.periodic_ = {true, false};
  g.spacing_ = {sk.h, sk.h};
  g.skew_ = sk;
  return g;
}

bool Grid::shifted(std::size_t idx, const std::array<int, 2>& offset, std::size_t& out) const {
  auto c = coords(idx);
  for (int a = 0; a < 2; ++a) {
    int v = c[a] + offset[a];
    if (periodic_[a]) {
      v %= shape_[a];
      if (v < 0) v += shape_[a];
    } else if (v < 0 || v >= shape_[a]) {
      return false;
    }
    c[a] = v;
  }
  out = index(c[0], c[1]);
  return true;
}

Vec2 Grid::position(std::size_t idx) const {
  const auto c = coords(idx);
  if (skew_) {
    const auto& s = *skew_;
    const long k = c[1] - s.kmax;
    const long t = c[0];
    const long i = k * s.a + t * s.q;
    const long j = k * s.b - t * s.p;
    return {s.h * static_cast<double>(i), s.h * static_cast<double>(j)};
  }
  return {origin_[0] + c[0] * spacing_[0], dim_ == 2 ? origin_[1] + c[1] * spacing_[1] : 0.0};
}

double Grid::cell_volume() const { return dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1]; }

double Grid::relative_weight(std::size_t idx) const {
  const auto c = coords(idx);
  double w = 1.0;
  for (int a = 0; a < 2; ++a) {
    if (periodic_[a] || shape_[a] == 1) continue;
    if (c[a] == 0 || c[a] == shape_[a] - 1) w *= 0.5;
  }
  return w;
}

double Grid::quad_weight(std::size_t idx) const { return cell_volume() * relative_weight(idx); }

std::array<int, 2> Grid::lattice_to_index(const std::array<int, 2>& d) const {
  if (!skew_) return d;
  const auto& s = *skew_;
  const int dk = s.p * d[0] + s.q * d[1];
  int dt = 0;
  if (s.q != 0) {
    dt = (d[0] - dk * s.a) / s.q;
  } else {
    dt = -(d[1] - dk * s.b) / s.p;
  }
  return {dt, dk};
}

double Grid::diameter() const {
  if (skew_) {
    const double normal = 2.0 * skew_->kmax * skew_->normal_spacing;
    return std::hypot(skew_->period, normal);
  }
  double acc = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double len = periodic_[a] ? shape_[a] * spacing_[a] : (shape_[a] - 1) * spacing_[a];
    acc += len * len;
  }
  return std::sqrt(acc);
}

bool Grid::operator==(const Grid& o) const {
  if (dim_ != o.dim_ || shape_ != o.shape_ || periodic_ != o.periodic_ || spacing_ != o.spacing_ ||
      origin_ != o.origin_ || skew_.has_value() != o.skew_.has_value())
    return false;
  if (skew_) {
    const auto &x = *skew_, &y = *o.skew_;
    return x.p == y.p && x.q == y.q && x.m == y.m && x.kmax == y.kmax && x.period == y.period;
  }
  return true;
}

GradientOperator::GradientOperator(const Grid& grid) : dim_(grid.dim()), size_(grid.size()) {
  for (int a = 0; a < dim_; ++a) {
    const auto step = grid.axis_step(a);
    const std::array<int, 2> back{-step[0], -step[1]};
    const std::array<int, 2> step2{2 * step[0], 2 * step[1]};
    const std::array<int, 2> back2{-2 * step[0], -2 * step[1]};
    const double inv2h = 0.5 / grid.spacing(a);
    auto& ent = entries_[a];
    ent.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      std::size_t f1, b1, f2, b2;
      Entry e;
      if (grid.shifted(i, step, f1) && grid.shifted(i, back, b1)) {
        e.node = {b1, f1, i};
        e.coef = {-inv2h, inv2h, 0.0};
      } else if (grid.shifted(i, step, f1) && grid.shifted(i, step2, f2)) {
        e.node = {i, f1, f2};
        e.coef = {-3.0 * inv2h, 4.0 * inv2h, -inv2h};
      } else if (grid.shifted(i, back, b1) && grid.shifted(i, back2, b2)) {
        e.node = {i, b1, b2};
        e.coef = {3.0 * inv2h, -4.0 * inv2h, inv2h};
      } else {
        throw ParameterError("grid too small for a second-order gradient");
      }
      ent[i] = e;
    }
    std::vector<std::array<std::size_t, 3>> touches;  // (target, slot, source)
    touches.reserve(3 * size_);
    for (std::size_t i = 0; i < size_; ++i)
      for (std::size_t s = 0; s < 3; ++s)
        if (ent[i].coef[s] != 0.0) touches.push_back({ent[i].node[s], s, i});
    std::sort(touches.begin(), touches.end());
    auto& start = t_start_[a];
    start.assign(size_ + 1, 0);
    for (const auto& t : touches) ++start[t[0] + 1];
    for (std::size_t y = 0; y < size_; ++y) start[y + 1] += start[y];
    t_node_[a].resize(touches.size());
    t_coef_[a].resize(touches.size());
    for (std::size_t k = 0; k < touches.size(); ++k) {
      const auto& t = touches[k];
      t_node_[a][k] = t[2];
      t_coef_[a][k] = ent[t[2]].coef[t[1]];
    }
  }
}

void GradientOperator::apply(const std::vector<double>& u,
                             std::array<std::vector<double>, 2>& out) const {
  for (int a = 0; a < dim_; ++a) {
    out[a].resize(size_);
    const auto& ent = entries_[a];
    for (std::size_t i = 0; i < size_; ++i) {
      const auto& e = ent[i];
      // Coefficients sum to zero; differences against node[0] make constants exact.
      const double u0 = u[e.node[0]];
      out[a][i] = e.coef[1] * (u[e.node[1]] - u0) + e.coef[2] * (u[e.node[2]] - u0);
    }
  }
  for (int a = dim_; a < 2; ++a) out[a].clear();
}

void GradientOperator::apply_transpose(const std::array<std::vector<double>, 2>& flux,
                                       std::vector<double>& out) const {
  out.assign(size_, 0.0);
  for (std::size_t y = 0; y < size_; ++y) {
    double acc = 0.0;
    for (int a = 0; a < dim_; ++a) {
      const auto& f = flux[a];
      for (std::size_t k = t_start_[a][y]; k < t_start_[a][y + 1]; ++k)
        acc += t_coef_[a][k] * f[t_node_[a][k]];
    }
    out[y] = acc;
  }
}

}  // namespace nlch
