#include "tubeq/grid.hpp"

#include <string>

#include "tubeq/error.hpp"

namespace tubeq {

SampleGrid::SampleGrid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3) {
    throw ParameterError("geometry.SampleGrid", "grid must have 1 to 3 axes");
  }
  size_ = 1;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const auto& ax = axes_[a];
    if (ax.count < kMinNodes) {
      throw ParameterError("geometry.SampleGrid",
                           "axis " + std::to_string(a) + " needs at least 8 nodes",
                           static_cast<int>(a));
    }
    if (!(ax.range.hi > ax.range.lo)) {
      throw ParameterError("geometry.SampleGrid",
                           "axis " + std::to_string(a) + " has an empty range",
                           static_cast<int>(a));
    }
    spacing_.push_back(ax.range.length() / static_cast<double>(ax.count));
    stride_[a] = size_;
    size_ *= ax.count;
  }
}

SampleGrid::SampleGrid(const std::vector<Axis>& domain, const std::vector<Index>& counts)
    : SampleGrid([&] {
        if (domain.size() != counts.size()) {
          throw ParameterError("geometry.SampleGrid", "one node count per domain axis required");
        }
        std::vector<GridAxis> axes;
        for (std::size_t a = 0; a < domain.size(); ++a) axes.push_back({domain[a], counts[a]});
        return axes;
      }()) {}

double SampleGrid::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

double SampleGrid::node(int axis, Index i) const {
  const auto& ax = axes_[axis];
  const double offset = ax.range.periodic ? 0.0 : 0.5;
  return ax.range.lo + (static_cast<double>(i) + offset) * spacing_[axis];
}

Index SampleGrid::flat(const std::array<Index, 3>& multi) const {
  Index f = 0;
  for (int a = 0; a < dim(); ++a) f += multi[a] * stride_[a];
  return f;
}

std::array<Index, 3> SampleGrid::multi(Index flat) const {
  std::array<Index, 3> m{0, 0, 0};
  for (int a = 0; a < dim(); ++a) {
    m[a] = (flat / stride_[a]) % axes_[a].count;
  }
  return m;
}

Eigen::VectorXd SampleGrid::params(Index flat) const {
  const auto m = multi(flat);
  Eigen::VectorXd p(dim());
  for (int a = 0; a < dim(); ++a) p[a] = node(a, m[a]);
  return p;
}

Index SampleGrid::neighbor(Index flat, int axis, int step) const {
  auto m = multi(flat);
  const Index n = axes_[axis].count;
  Index j = m[axis] + step;
  if (j < 0 || j >= n) {
    if (!axes_[axis].range.periodic) return -1;
    j = (j % n + n) % n;
  }
  m[axis] = j;
  return this->flat(m);
}

bool SampleGrid::same_shape(const SampleGrid& other) const {
  if (dim() != other.dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (count(a) != other.count(a) || periodic(a) != other.periodic(a) ||
        range(a).lo != other.range(a).lo || range(a).hi != other.range(a).hi) {
      return false;
    }
  }
  return true;
}

}  // namespace tubeq
