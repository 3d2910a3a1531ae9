#pragma once

#include <Eigen/Core>
#include <vector>

#include "tubeq/frames.hpp"

namespace tubeq {

// Moving frame of the tubular neighbourhood at normal offset q from one
// grid node: columns E_a = e_a + q^i gamma^b_{ia} e_b, then E_i = e_i.
struct TubeFrame {
  Eigen::MatrixXd frame;   // ambient x ambient
  Eigen::MatrixXd metric;  // E^T E
  double det = 0.0;
  double focal_radius = 0.0;
  bool beyond_focal = false;
};

// Metric of the tube at one node, exactly quadratic in q for the frame above:
//   g_par(q) = base + q^i linear[i] + q^i q^j quadratic[i*m + j]
//   det g    = base_det * (1 + det_linear.q + q.det_quadratic.q + O(q^3))
struct TubeMetricNode {
  Eigen::MatrixXd base;
  std::vector<Eigen::MatrixXd> linear;
  std::vector<Eigen::MatrixXd> quadratic;
  Eigen::VectorXd det_linear;
  Eigen::MatrixXd det_quadratic;
  double base_det = 0.0;

  Eigen::MatrixXd tangential(const Eigen::VectorXd& q) const;
  // Full block metric: tangential block, identity normal block, zero mixing.
  Eigen::MatrixXd full(const Eigen::VectorXd& q) const;
  double det_expansion(const Eigen::VectorXd& q) const;
};

struct TubeMetric {
  SampleGrid grid;
  int codim = 0;
  std::vector<TubeMetricNode> nodes;
};

// 1 / (largest |eigenvalue| of any gamma_i) at a node; +inf when flat.
double focal_radius(const ConnectionCoefficients& coeffs, Index node);

TubeFrame tube_frame(const FrameField& frames, const ConnectionCoefficients& coeffs, Index node,
                     const Eigen::VectorXd& q);

TubeMetric tube_metric(const FrameField& frames, const ConnectionCoefficients& coeffs);

// V_eff = 1/4 sum_i (tr gamma_i)^2 - 1/2 sum_i tr(gamma_i gamma_i), with
// (gamma_i)^b_a = gamma^b_{ia}; the constrained operator is -Delta_S + V_eff.
Eigen::VectorXd effective_potential(const ConnectionCoefficients& coeffs,
                                    const FrameField& frames);

template <typename Derived>
typename Derived::Scalar effective_potential_term(const Eigen::MatrixBase<Derived>& weingarten) {
  using S = typename Derived::Scalar;
  const S tr = weingarten.trace();
  return tr * tr / S(4) - (weingarten * weingarten).trace() / S(2);
}

}  // namespace tubeq
