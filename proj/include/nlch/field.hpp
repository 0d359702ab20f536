#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "nlch/grid.hpp"

namespace nlch {

// Scalar node values on a grid.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field(Grid g, double fill = 0.0) : grid(std::move(g)), values(grid.size(), fill) {}
  Field(Grid g, std::vector<double> v);

  static Field from_function(const Grid& g, const std::function<double(const Vec2&)>& f);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 2> components;
};

VectorField gradient(const Field& f);

// Node-wise clamp to [-1, 1].
Field truncate_unit(const Field& f);

// Interpolated value at an arbitrary point (multilinear in index coordinates;
// periodic axes wrap, points outside fixed axes are clamped to the boundary).
double interpolate(const Field& f, const Vec2& x);

struct Slice {
  std::vector<double> t;
  std::vector<double> values;
  double step = 0.0;
  // True when some sample is not a grid node (line off the lattice).
  bool approximate = false;
};

// Samples of u(z + t xi) along the part of the line inside the domain. Lattice
// directions (axes, and diagonals on square cells) are sampled at the nodes they
// pass through; any other direction at spacing min(h) with interpolation.
Slice slice_extract(const Field& f, const Vec2& xi, const Vec2& z);

// Number of maximal intervals (σ,τ) of the piecewise-linear interpolant with
// u(σ) = ∓1/2, u(τ) = ±1/2 and u strictly inside (-1/2, 1/2) in between.
int count_transitions(const std::vector<double>& samples);

// CSV with header `x[,y],value`, one row per node in storage order (axis 0 fastest).
void write_field_csv(std::ostream& os, const Field& f);
// Reads values written by write_field_csv onto an existing grid; coordinates are checked.
Field read_field_csv(std::istream& is, const Grid& grid);

}  // namespace nlch
