#include "tubeq/tubular.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "tubeq/error.hpp"

namespace tubeq {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kConnectionTol = 1e-8;

void require_parallel_normals(const ConnectionCoefficients& coeffs, const FrameField& frames,
                              const char* where) {
  if (frames.codim() > 1 && coeffs.max_normal_connection() > kConnectionTol) {
    throw Error(where, "normal connection not eliminated; apply hashimoto_rotate first");
  }
}

}  // namespace

double focal_radius(const ConnectionCoefficients& coeffs, Index node) {
  double largest = 0.0;
  for (const MatrixXd& w : coeffs.weingarten[node]) {
    const Eigen::VectorXcd ev = w.eigenvalues();
    largest = std::max(largest, ev.cwiseAbs().maxCoeff());
  }
  return largest > 0.0 ? 1.0 / largest : std::numeric_limits<double>::infinity();
}

TubeFrame tube_frame(const FrameField& frames, const ConnectionCoefficients& coeffs, Index node,
                     const VectorXd& q) {
  require_parallel_normals(coeffs, frames, "tubular.tube_frame");
  const int k = frames.intrinsic;
  const int m = frames.codim();
  if (q.size() != m) throw ParameterError("tubular.tube_frame", "q must have codim entries");

  const MatrixXd& e = frames.tangent[node];
  MatrixXd shift = MatrixXd::Zero(k, k);
  for (int i = 0; i < m; ++i) shift += q[i] * coeffs.weingarten[node][i];

  TubeFrame t;
  t.frame.resize(frames.ambient, frames.ambient);
  t.frame.leftCols(k) = e + e * shift;
  t.frame.rightCols(m) = frames.normal[node];
  t.metric = t.frame.transpose() * t.frame;
  t.det = t.metric.determinant();
  t.focal_radius = focal_radius(coeffs, node);
  t.beyond_focal = q.norm() >= t.focal_radius;
  if (t.det <= 0.0) {
    throw Error("tubular.tube_frame", "degenerate tube metric (offset beyond the focal radius)");
  }
  return t;
}

MatrixXd TubeMetricNode::tangential(const VectorXd& q) const {
  const Index m = static_cast<Index>(linear.size());
  MatrixXd g = base;
  for (Index i = 0; i < m; ++i) {
    g += q[i] * linear[i];
    for (Index j = 0; j < m; ++j) g += q[i] * q[j] * quadratic[i * m + j];
  }
  return g;
}

MatrixXd TubeMetricNode::full(const VectorXd& q) const {
  const Index k = base.rows();
  const Index m = static_cast<Index>(linear.size());
  MatrixXd g = MatrixXd::Zero(k + m, k + m);
  g.topLeftCorner(k, k) = tangential(q);
  g.bottomRightCorner(m, m).setIdentity();
  return g;
}

double TubeMetricNode::det_expansion(const VectorXd& q) const {
  return base_det * (1.0 + det_linear.dot(q) + q.dot(det_quadratic * q));
}

TubeMetric tube_metric(const FrameField& frames, const ConnectionCoefficients& coeffs) {
  require_parallel_normals(coeffs, frames, "tubular.tube_metric");
  const int m = frames.codim();
  TubeMetric out;
  out.grid = frames.grid;
  out.codim = m;
  out.nodes.resize(frames.size());
  for (Index node = 0; node < frames.size(); ++node) {
    const MatrixXd& g = frames.metric[node];
    const auto& w = coeffs.weingarten[node];
    TubeMetricNode& t = out.nodes[node];
    t.base = g;
    t.base_det = frames.metric_det[node];
    t.det_linear.resize(m);
    t.det_quadratic.resize(m, m);
    for (int i = 0; i < m; ++i) {
      // gamma^c_{ia} g_{cb} + g_{ac} gamma^c_{ib}
      t.linear.push_back(w[i].transpose() * g + g * w[i]);
      t.det_linear[i] = 2.0 * w[i].trace();
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        t.quadratic.push_back(w[i].transpose() * g * w[j]);
        t.det_quadratic(i, j) = 2.0 * w[i].trace() * w[j].trace() - (w[i] * w[j]).trace();
      }
    }
  }
  return out;
}

VectorXd effective_potential(const ConnectionCoefficients& coeffs, const FrameField& frames) {
  if (coeffs.size() != frames.size()) {
    throw ParameterError("tubular.effective_potential", "coefficients and frames differ in size");
  }
  VectorXd v(coeffs.size());
  for (Index node = 0; node < coeffs.size(); ++node) {
    double sum = 0.0;
    for (const MatrixXd& w : coeffs.weingarten[node]) sum += effective_potential_term(w);
    v[node] = sum;
  }
  return v;
}

}  // namespace tubeq
