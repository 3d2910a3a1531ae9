#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <random>

#include "tubeq/cli.hpp"
#include "tubeq/frames.hpp"
#include "tubeq/operators.hpp"
#include "tubeq/spectra.hpp"
#include "tubeq/tubular.hpp"

namespace tubeq::cli {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Check at_most(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance};
}

}  // namespace

std::vector<Check> verify_invariants(const Embedding& embedding, const SampleGrid& grid,
                                     Index eigencount) {
  std::vector<Check> out;
  const int k = embedding.intrinsic_dim();
  const int m = embedding.codim();

  // frames
  const FrameField raw_frames = build_frames(embedding, grid);
  const ConnectionCoefficients raw_coeffs = connection_coefficients(embedding, raw_frames);
  double orth = 0.0, defect = 0.0, scale = 1.0;
  for (Index n = 0; n < grid.size(); ++n) {
    const MatrixXd& nn = raw_frames.normal[n];
    orth = std::max(orth, (nn.transpose() * nn - MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff());
    orth = std::max(orth, (nn.transpose() * raw_frames.tangent[n]).cwiseAbs().maxCoeff() /
                              raw_frames.tangent[n].norm());
    for (int i = 0; i < m; ++i) {
      defect = std::max(defect, second_form_defect(raw_frames.metric[n], raw_coeffs.weingarten[n][i],
                                                   raw_coeffs.second_form[n][i]));
      scale = std::max(scale, raw_coeffs.second_form[n][i].cwiseAbs().maxCoeff());
    }
  }
  out.push_back(at_most("frames.normal_orthonormality", orth, 1e-10));
  out.push_back(at_most("frames.second_form_identity", defect / scale, 1e-6));

  FrameField frames = raw_frames;
  ConnectionCoefficients coeffs = raw_coeffs;
  if (m == 2) {
    HashimotoResult h = hashimoto_rotate(raw_coeffs, raw_frames);
    out.push_back(at_most("frames.hashimoto_residual", h.residual, 1e-8));
    frames = std::move(h.frames);
    coeffs = std::move(h.coeffs);
  }

  // tubular
  const VectorXd v = effective_potential(coeffs, frames);
  const CurvatureData cd = curvature_data(embedding, frames, coeffs);
  double identity = 0.0;
  for (Index n = 0; n < grid.size(); ++n) {
    const double expected = k == 1 ? -0.25 * cd.curvature[n] * cd.curvature[n]
                                   : -(cd.mean[n] * cd.mean[n] - cd.gauss[n]);
    identity = std::max(identity, std::abs(v[n] - expected) / std::max(1.0, std::abs(expected)));
  }
  out.push_back(at_most("tubular.potential_identity", identity, 1e-9));
  if (m <= 2) {
    const TubeMetric tm = tube_metric(frames, coeffs);
    double remainder = 0.0;
    const Index stride = std::max<Index>(1, grid.size() / 64);
    for (Index n = 0; n < grid.size(); n += stride) {
      const double r = focal_radius(coeffs, n);
      const double q0 = 1e-3 * (std::isfinite(r) ? std::min(1.0, r) : 1.0);
      VectorXd q = VectorXd::Constant(m, q0 / std::sqrt(double(m)));
      const double exact = tube_frame(frames, coeffs, n, q).det;
      remainder = std::max(remainder, std::abs(exact - tm.nodes[n].det_expansion(q)) / exact);
    }
    out.push_back(at_most("tubular.det_expansion", remainder, 1e-6));
  }

  // operators
  const HamiltonianParts parts = submanifold_hamiltonian_parts(embedding, grid);
  const RealOperator& lap = parts.laplacian;
  out.push_back(at_most("operators.laplacian_self_adjoint", weighted_self_adjoint_residual(lap),
                        1e-10));
  bool closed = true;
  for (int a = 0; a < k; ++a) closed = closed && grid.periodic(a);
  if (closed) {
    const VectorXd ones = VectorXd::Ones(grid.size());
    const double norm = lap.matrix.coeffs().cwiseAbs().maxCoeff();
    out.push_back(at_most("operators.laplacian_kernel",
                          (lap.matrix * ones).cwiseAbs().maxCoeff() / norm, 1e-12));
  }
  out.push_back(at_most("operators.half_density_symmetry", symmetry_residual(parts.hamiltonian.matrix),
                        1e-12));
  const MetricField metric = MetricField::from_embedding(embedding);
  for (int a = 0; a < k; ++a) {
    out.push_back(at_most("operators.momentum_self_adjoint_" + std::to_string(a),
                          weighted_self_adjoint_residual(momentum_operator(a, metric, grid)),
                          1e-10));
  }
  {
    const RealOperator twice = adjoint(adjoint(lap));
    out.push_back(at_most("operators.adjoint_involution",
                          (twice.matrix - lap.matrix).norm() / lap.matrix.norm(), 1e-14));
  }

  // spectra
  const Index count = std::max<Index>(1, std::min(eigencount, grid.size()));
  const Spectrum half = eigen_lowest(parts.hamiltonian, count);
  const Spectrum rawsp = eigen_lowest(raw_hamiltonian(parts), count);
  double similarity = 0.0;
  for (Index i = 0; i < count; ++i) {
    similarity = std::max(similarity, std::abs(half.eigenvalues[i] - rawsp.eigenvalues[i]) /
                                          std::max(1.0, std::abs(half.eigenvalues[i])));
  }
  out.push_back(at_most("spectra.similarity", similarity, 1e-9));
  out.push_back(at_most("spectra.residual", std::max(half.max_residual, rawsp.max_residual), 1e-8));
  {
    const VectorXd w = half.weight.size() ? parts.hamiltonian.pairing() : VectorXd();
    const MatrixXd gram = half.eigenvectors.transpose() * w.asDiagonal() * half.eigenvectors;
    out.push_back(at_most("spectra.orthonormality",
                          (gram - MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff(), 1e-8));
  }
  {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    VectorXd u(grid.size()), x(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
      u[i] = normal(rng);
      x[i] = normal(rng);
    }
    const VectorXd root = lap.weight.cwiseSqrt();
    const double a = weighted_inner_product(u, x, lap);
    const double b = weighted_inner_product(VectorXd(root.cwiseProduct(u)),
                                            VectorXd(root.cwiseProduct(x)), parts.hamiltonian);
    out.push_back(at_most("spectra.pairing_map",
                          std::abs(a - b) / std::max(1e-300, std::abs(a) + std::abs(b)), 1e-12));
  }
  return out;
}

}  // namespace tubeq::cli
