#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <vector>

#include "tubeq/geometry.hpp"
#include "tubeq/grid.hpp"

namespace tubeq {

// Orthonormal normal frame (ambient x codim) as a smooth function of the
// parameters. Connection coefficients differentiate this function, so it
// must be defined off the grid nodes as well.
using NormalFieldFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct FrameField {
  SampleGrid grid;
  int ambient = 0;
  int intrinsic = 0;
  std::vector<Eigen::MatrixXd> tangent;  // ambient x k, columns d_a Y
  std::vector<Eigen::MatrixXd> normal;   // ambient x codim, orthonormal
  std::vector<Eigen::MatrixXd> metric;   // k x k induced metric
  Eigen::VectorXd metric_det;
  // Normal-frame rotation applied at each node by hashimoto_rotate.
  Eigen::VectorXd rotation;
  bool rotated = false;
  NormalFieldFn normal_field;

  Index size() const { return grid.size(); }
  int codim() const { return ambient - intrinsic; }
};

// Index conventions (a, b tangent; i, j normal), all per node:
//   weingarten[node][i](b, a)  = gamma^b_{i a}  = <d_a e_i, e^b>
//   normal[node][a](i, j)      = gamma^j_{i a}  = <d_a e_i, e_j>
//   second_form[node][i](b, a) = gamma^i_{b a}  = <d_a d_b Y, e_i>
struct ConnectionCoefficients {
  std::vector<std::vector<Eigen::MatrixXd>> weingarten;
  std::vector<std::vector<Eigen::MatrixXd>> normal;
  std::vector<std::vector<Eigen::MatrixXd>> second_form;

  Index size() const { return static_cast<Index>(weingarten.size()); }
  // Largest |gamma^j_{i a}| over the grid.
  double max_normal_connection() const;
};

struct HashimotoResult {
  FrameField frames;
  ConnectionCoefficients coeffs;
  // Accumulated rotation angle of the normal pair around each closed grid
  // line through the seed node (axis order), wrapped to (-pi, pi]. Empty for
  // open lines and codimension one.
  std::vector<double> holonomy;
  // Largest normal-connection coefficient left after rotation.
  double residual = 0.0;
};

struct CurvatureData {
  // curves
  Eigen::VectorXd curvature;
  Eigen::VectorXd torsion;  // E^3 only, NaN otherwise
  Eigen::VectorXcd complex_curvature;
  // surfaces
  Eigen::VectorXd mean;   // |H| (|H_c| in codimension two)
  Eigen::VectorXd gauss;
  std::vector<Eigen::VectorXd> mean_components;  // H_i = -tr(gamma_i)/2
  Eigen::VectorXcd complex_mean;                 // H_1 + i H_2, codim two
};

// Smooth global normal frame: exact normals when the embedding has them,
// otherwise Gram-Schmidt of a fixed ambient reference projected onto the
// normal space (completed by the generalised cross product), with the
// reference chosen to stay away from the tangent space on the whole grid.
NormalFieldFn default_normal_field(const Embedding& embedding, const SampleGrid& grid);

FrameField build_frames(const Embedding& embedding, const SampleGrid& grid);
FrameField build_frames(const Embedding& embedding, const SampleGrid& grid,
                        NormalFieldFn normal_field);

ConnectionCoefficients connection_coefficients(const Embedding& embedding,
                                               const FrameField& frames);

HashimotoResult hashimoto_rotate(const ConnectionCoefficients& coeffs, const FrameField& frames);

CurvatureData curvature_data(const Embedding& embedding, const FrameField& frames,
                             const ConnectionCoefficients& coeffs);

// Same frame field with a constant rotation applied to the normal frame:
// e'_j = sum_i e_i R(i, j).
FrameField rotate_normal_frame(const FrameField& frames, const Eigen::MatrixXd& rotation);

// Generalised cross product of the columns of an n x (n-1) matrix; the
// result completes them to a positively oriented basis.
Eigen::VectorXd generalized_cross(const Eigen::MatrixXd& columns);

// Per-node kernels ------------------------------------------------------

// H = tr(shape operator)/2 with shape operator -gamma_i.
template <typename Derived>
typename Derived::Scalar mean_curvature(const Eigen::MatrixBase<Derived>& weingarten) {
  return -weingarten.trace() / typename Derived::Scalar(2);
}

template <typename Derived>
typename Derived::Scalar gauss_curvature(const Eigen::MatrixBase<Derived>& weingarten) {
  return (-weingarten).determinant();
}

// Identity gamma^i_{ba} = -g_{bc} gamma^c_{ia}; returns the
// largest entry of the defect.
template <typename DerivedG, typename DerivedW, typename DerivedS>
double second_form_defect(const Eigen::MatrixBase<DerivedG>& metric,
                          const Eigen::MatrixBase<DerivedW>& weingarten,
                          const Eigen::MatrixBase<DerivedS>& second_form) {
  return (second_form + metric * weingarten).cwiseAbs().maxCoeff();
}

}  // namespace tubeq
