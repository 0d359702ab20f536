#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nlch/kernel.hpp"

namespace nlch {

enum class Boundary { periodic, fixed };

std::string to_string(Boundary b);

// Uniform Cartesian grid description. Periodic axes have h = extent / nodes,
// fixed axes have h = extent / (nodes - 1) and nodes on both end points.
struct GridSpec {
  int dim = 1;
  std::array<int, 2> nodes{1, 1};
  std::array<double, 2> extent{1.0, 1.0};
  std::array<double, 2> origin{0.0, 0.0};
  std::array<Boundary, 2> boundary{Boundary::periodic, Boundary::periodic};

  void validate() const;
};

// Nodes of a Cartesian lattice hZ^n, stored on a rectangular index grid
// (axis 0 fastest). Either an ordinary box, or a skew strip: the lattice points
// within a slab around the line through 0 with normal (p,q)/|(p,q)|, identified
// under the tangential lattice period m(q,-p). In the strip, index axis 0 is the
// periodic tangential coordinate and index axis 1 the normal layer k, with
// x·ν = h k / |(p,q)|.
class Grid {
 public:
  static Grid cartesian(const GridSpec& spec);
  // 1D line centred at 0 with node spacing h and fixed ends at ±halfwidth (rounded
  // outward to a whole number of cells).
  static Grid line(double h, double halfwidth);
  // Skew strip with m nodes per tangential period of length `period` (so
  // h = period / (m |(p,q)|)) and normal extent |x·ν| <= halfwidth.
  static Grid skew_strip(int p, int q, int m, double halfwidth, double period = 1.0);

  int dim() const { return dim_; }
  const std::array<int, 2>& shape() const { return shape_; }
  bool periodic(int axis) const { return periodic_[axis]; }
  std::size_t size() const { return static_cast<std::size_t>(shape_[0]) * shape_[1]; }
  bool is_skew() const { return skew_.has_value(); }

  std::size_t index(int i0, int i1) const {
    return static_cast<std::size_t>(i0) + static_cast<std::size_t>(shape_[0]) * i1;
  }
  std::array<int, 2> coords(std::size_t idx) const {
    return {static_cast<int>(idx % shape_[0]), static_cast<int>(idx / shape_[0])};
  }
  // Index of the node at `offset` (index units) from idx; false if it leaves the domain.
  bool shifted(std::size_t idx, const std::array<int, 2>& offset, std::size_t& out) const;

  Vec2 position(std::size_t idx) const;
  // Lattice spacing along physical axis a.
  double spacing(int axis) const { return spacing_[axis]; }
  std::array<double, 2> spacings() const { return spacing_; }
  double cell_volume() const;
  // Trapezoid factor in {1, 1/2, 1/4} times the cell volume.
  double quad_weight(std::size_t idx) const;
  double relative_weight(std::size_t idx) const;

  // Index offset of the lattice displacement d (in units of the lattice spacing).
  std::array<int, 2> lattice_to_index(const std::array<int, 2>& d) const;
  // Index offset of one lattice step along physical axis a.
  std::array<int, 2> axis_step(int axis) const { return lattice_to_index(axis == 0 ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1}); }

  // Diameter of the domain (used to clip kernel stencils).
  double diameter() const;

  // Skew strip parameters.
  struct Skew {
    int p = 1, q = 0, m = 1;
    int a = 1, b = 0;  // a p + b q = 1
    int kmax = 0;
    double h = 1.0;
    double period = 1.0;
    Vec2 normal{1.0, 0.0};
    double normal_spacing = 1.0;
  };
  const std::optional<Skew>& skew() const { return skew_; }
  const std::optional<GridSpec>& spec() const { return spec_; }

  bool operator==(const Grid& other) const;

 private:
  int dim_ = 1;
  std::array<int, 2> shape_{1, 1};
  std::array<bool, 2> periodic_{false, false};
  std::array<double, 2> spacing_{1.0, 1.0};
  std::array<double, 2> origin_{0.0, 0.0};
  std::optional<GridSpec> spec_;
  std::optional<Skew> skew_;
};

// Central differences, second-order one-sided at fixed boundaries, built per node
// as at most three (node, coefficient) pairs per physical axis.
class GradientOperator {
 public:
  explicit GradientOperator(const Grid& grid);

  int components() const { return dim_; }
  // out[a][i] = (D_a u)_i
  void apply(const std::vector<double>& u, std::array<std::vector<double>, 2>& out) const;
  // out = Σ_a D_a^T flux[a]
  void apply_transpose(const std::array<std::vector<double>, 2>& flux, std::vector<double>& out) const;

 private:
  struct Entry {
    std::array<std::size_t, 3> node{};
    std::array<double, 3> coef{};
  };
  int dim_ = 1;
  std::size_t size_ = 0;
  std::array<std::vector<Entry>, 2> entries_;
  // Transpose as a gather: for node y, the (source node, coefficient) pairs that
  // touch it, ordered by stencil slot so the summation order is shift invariant.
  std::array<std::vector<std::size_t>, 2> t_start_;
  std::array<std::vector<std::size_t>, 2> t_node_;
  std::array<std::vector<double>, 2> t_coef_;
};

}  // namespace nlch
