#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace tubeq {

using Eigen::Index;

enum class Boundary { periodic, dirichlet };

// One parameter axis: [lo, hi) when periodic, [lo, hi] otherwise.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double length() const { return hi - lo; }
};

struct GridAxis {
  Axis range;
  Index count = 0;
};

// Uniform tensor-product grid over a parameter domain. Periodic axes carry
// vertex nodes lo + i*h with h = (hi - lo)/count; non-periodic axes carry
// cell-centred nodes lo + (i + 1/2)*h so the Dirichlet faces sit exactly at
// lo and hi. Flat node index runs fastest along axis 0.
class SampleGrid {
 public:
  static constexpr Index kMinNodes = 8;

  SampleGrid() = default;
  explicit SampleGrid(std::vector<GridAxis> axes);
  SampleGrid(const std::vector<Axis>& domain, const std::vector<Index>& counts);

  int dim() const { return static_cast<int>(axes_.size()); }
  Index size() const { return size_; }
  Index count(int axis) const { return axes_[axis].count; }
  const Axis& range(int axis) const { return axes_[axis].range; }
  bool periodic(int axis) const { return axes_[axis].range.periodic; }
  Boundary boundary(int axis) const {
    return periodic(axis) ? Boundary::periodic : Boundary::dirichlet;
  }
  double spacing(int axis) const { return spacing_[axis]; }
  // Product of spacings: the quadrature weight of one node.
  double cell_volume() const;

  double node(int axis, Index i) const;
  // Parameter value of the face between node i and i+1 (i = -1 and
  // i = count-1 give the boundary faces of a non-periodic axis).
  double face(int axis, Index i) const { return node(axis, i) + 0.5 * spacing_[axis]; }

  Index flat(const std::array<Index, 3>& multi) const;
  std::array<Index, 3> multi(Index flat) const;
  Eigen::VectorXd params(Index flat) const;

  // Neighbour along `axis` at offset +/-1, wrapping on periodic axes.
  // Returns -1 when the step leaves a non-periodic axis.
  Index neighbor(Index flat, int axis, int step) const;

  bool same_shape(const SampleGrid& other) const;

 private:
  std::vector<GridAxis> axes_;
  std::vector<double> spacing_;
  std::array<Index, 3> stride_{1, 1, 1};
  Index size_ = 0;
};

}  // namespace tubeq
