#include "nlch/cubature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nlch {

namespace {

// 5-point Gauss-Legendre on [-1,1].
constexpr std::array<double, 5> kGaussNodes{
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
    0.2369268850561891};

double gauss_box(const PointFn& f, const Box& b) {
  const double cx = 0.5 * (b.lo[0] + b.hi[0]);
  const double rx = 0.5 * (b.hi[0] - b.lo[0]);
  if (b.dim == 1) {
    double acc = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i)
      acc += kGaussWeights[i] * f({cx + rx * kGaussNodes[i], 0.0});
    return acc * rx;
  }
  const double cy = 0.5 * (b.lo[1] + b.hi[1]);
  const double ry = 0.5 * (b.hi[1] - b.lo[1]);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i)
    for (std::size_t j = 0; j < kGaussNodes.size(); ++j)
      acc += kGaussWeights[i] * kGaussWeights[j] *
             f({cx + rx * kGaussNodes[i], cy + ry * kGaussNodes[j]});
  return acc * rx * ry;
}

int split_box(const Box& b, std::array<Box, 4>& out) {
  const double mx = 0.5 * (b.lo[0] + b.hi[0]);
  if (b.dim == 1) {
    out[0] = b;
    out[0].hi[0] = mx;
    out[1] = b;
    out[1].lo[0] = mx;
    return 2;
  }
  const double my = 0.5 * (b.lo[1] + b.hi[1]);
  int k = 0;
  for (int ix = 0; ix < 2; ++ix)
    for (int iy = 0; iy < 2; ++iy) {
      Box c = b;
      c.lo[0] = ix == 0 ? b.lo[0] : mx;
      c.hi[0] = ix == 0 ? mx : b.hi[0];
      c.lo[1] = iy == 0 ? b.lo[1] : my;
      c.hi[1] = iy == 0 ? my : b.hi[1];
      out[k++] = c;
    }
  return 4;
}

CubatureResult refine(const PointFn& f, const Box& b, double parent, double rel_tol,
                      double abs_tol, int depth, int max_depth) {
  std::array<Box, 4> kids;
  const int nk = split_box(b, kids);
  std::array<double, 4> vals{};
  double sum = 0.0;
  for (int i = 0; i < nk; ++i) {
    vals[i] = gauss_box(f, kids[i]);
    sum += vals[i];
  }
  const double diff = std::abs(sum - parent);
  if (diff <= std::max(rel_tol * std::abs(sum), abs_tol) || depth >= max_depth)
    return {sum, diff, depth};
  CubatureResult total;
  for (int i = 0; i < nk; ++i) {
    auto r = refine(f, kids[i], vals[i], rel_tol, abs_tol / nk, depth + 1, max_depth);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.max_depth_reached = std::max(total.max_depth_reached, r.max_depth_reached);
  }
  return total;
}

// ∫_{x0}^{x1} sqrt(r^2 - x^2) dx for -r <= x0 <= x1 <= r.
double half_disk_primitive(double x, double r) {
  const double c = std::clamp(x / r, -1.0, 1.0);
  return 0.5 * (x * std::sqrt(std::max(0.0, r * r - x * x)) + r * r * std::asin(c));
}

// ∫_{x0}^{x1} max(0, min(y1, s(x)) - max(y0, -s(x))) dx with s(x) = sqrt(r^2-x^2).
double disk_rect_area(double x0, double x1, double y0, double y1, double r) {
  x0 = std::max(x0, -r);
  x1 = std::min(x1, r);
  if (x1 <= x0 || y1 <= y0) return 0.0;
  // Breakpoints where s(x) crosses |y0| or |y1|.
  std::array<double, 8> br{};
  int nb = 0;
  br[nb++] = x0;
  br[nb++] = x1;
  for (double y : {y0, y1}) {
    if (std::abs(y) < r) {
      const double xb = std::sqrt(r * r - y * y);
      for (double c : {-xb, xb})
        if (c > x0 && c < x1) br[nb++] = c;
    }
  }
  std::sort(br.begin(), br.begin() + nb);
  double area = 0.0;
  for (int i = 0; i + 1 < nb; ++i) {
    const double a = br[i], b = br[i + 1];
    if (b <= a) continue;
    const double xm = 0.5 * (a + b);
    const double sm = std::sqrt(std::max(0.0, r * r - xm * xm));
    // On (a,b) the active upper/lower bounds do not switch.
    const bool upper_is_s = sm < y1;
    const bool lower_is_s = -sm > y0;
    const double top_at = upper_is_s ? sm : y1;
    const double bot_at = lower_is_s ? -sm : y0;
    if (top_at <= bot_at) continue;
    const double s_int = half_disk_primitive(b, r) - half_disk_primitive(a, r);
    double piece = 0.0;
    piece += upper_is_s ? s_int : y1 * (b - a);
    piece -= lower_is_s ? -s_int : y0 * (b - a);
    area += piece;
  }
  return area;
}

}  // namespace

double Box::volume() const {
  double v = hi[0] - lo[0];
  if (dim == 2) v *= hi[1] - lo[1];
  return v;
}

CubatureResult adaptive_cubature(const PointFn& f, const Box& box, double rel_tol,
                                 double abs_tol, int max_depth) {
  const double parent = gauss_box(f, box);
  return refine(f, box, parent, rel_tol, abs_tol, 1, max_depth);
}

double uniform_cubature(const PointFn& f, const Box& box, int splits) {
  double total = 0.0;
  const double dx = (box.hi[0] - box.lo[0]) / splits;
  if (box.dim == 1) {
    for (int i = 0; i < splits; ++i) {
      Box c = box;
      c.lo[0] = box.lo[0] + i * dx;
      c.hi[0] = c.lo[0] + dx;
      total += gauss_box(f, c);
    }
    return total;
  }
  const double dy = (box.hi[1] - box.lo[1]) / splits;
  for (int i = 0; i < splits; ++i)
    for (int j = 0; j < splits; ++j) {
      Box c = box;
      c.lo[0] = box.lo[0] + i * dx;
      c.hi[0] = c.lo[0] + dx;
      c.lo[1] = box.lo[1] + j * dy;
      c.hi[1] = c.lo[1] + dy;
      total += gauss_box(f, c);
    }
  return total;
}

double ball_box_measure(const Box& box, double radius) {
  if (radius <= 0.0) return 0.0;
  if (box.dim == 1) {
    const double a = std::max(box.lo[0], -radius);
    const double b = std::min(box.hi[0], radius);
    return std::max(0.0, b - a);
  }
  return disk_rect_area(box.lo[0], box.hi[0], box.lo[1], box.hi[1], radius);
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

}  // namespace nlch
