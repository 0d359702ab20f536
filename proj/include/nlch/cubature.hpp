#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>

namespace nlch {

// Axis-aligned box in R^n, n in {1,2}. Unused upper axis is ignored for n = 1.
struct Box {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};

  double volume() const;
};

using PointFn = std::function<double(const std::array<double, 2>&)>;

struct CubatureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int max_depth_reached = 0;
};

// Adaptive tensor Gauss-Legendre cubature: a cell is split into 2^n children
// until the children agree with the parent to rel_tol (or abs_tol).
CubatureResult adaptive_cubature(const PointFn& f, const Box& box, double rel_tol,
                                 double abs_tol, int max_depth);

// Fixed uniform subdivision into `splits` pieces per axis, Gauss-Legendre on each.
double uniform_cubature(const PointFn& f, const Box& box, int splits);

// Exact measure of box ∩ {|x| < radius} (length for n = 1, area for n = 2).
double ball_box_measure(const Box& box, double radius);

// Deterministic pairwise summation (blocks of 8, binary tree above that).
double pairwise_sum(std::span<const double> values);

}  // namespace nlch
