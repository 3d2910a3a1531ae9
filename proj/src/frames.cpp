#include "tubeq/frames.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tubeq/error.hpp"

namespace tubeq {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::numbers::pi;

constexpr double kNearParallel = 1e-6;
constexpr double kComfortable = 0.1;

MatrixXd tangent_basis(const MatrixXd& jacobian) {
  Eigen::HouseholderQR<MatrixXd> qr(jacobian);
  return qr.householderQ() * MatrixXd::Identity(jacobian.rows(), jacobian.cols());
}

// Gram-Schmidt of `refs` against the tangent span, completed to a full
// positively oriented normal frame.
MatrixXd frame_from_reference(const MatrixXd& jacobian, const MatrixXd& refs) {
  const Index n = jacobian.rows();
  const Index k = jacobian.cols();
  const Index m = n - k;
  const MatrixXd q = tangent_basis(jacobian);
  MatrixXd normals(n, m);
  for (Index j = 0; j < refs.cols(); ++j) {
    VectorXd v = refs.col(j) - q * (q.transpose() * refs.col(j));
    for (Index i = 0; i < j; ++i) v -= normals.col(i).dot(v) * normals.col(i);
    normals.col(j) = v.normalized();
  }
  MatrixXd span(n, n - 1);
  span << jacobian, normals.leftCols(m - 1);
  normals.col(m - 1) = generalized_cross(span).normalized();
  return normals;
}

// Smallest singular value of the reference projected off the tangent space.
double reference_quality(const MatrixXd& jacobian, const MatrixXd& refs) {
  const MatrixXd q = tangent_basis(jacobian);
  const MatrixXd proj = refs - q * (q.transpose() * refs);
  Eigen::JacobiSVD<MatrixXd> svd(proj);
  return svd.singularValues().minCoeff();
}

std::vector<MatrixXd> reference_candidates(int n, int count) {
  std::vector<MatrixXd> out;
  // coordinate axes, highest index first, all combinations of `count`
  std::vector<int> pick(count);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == count) {
      MatrixXd b = MatrixXd::Zero(n, count);
      for (int c = 0; c < count; ++c) b(pick[c], c) = 1.0;
      out.push_back(b);
      return;
    }
    for (int axis = start; axis >= 0; --axis) {
      pick[depth] = axis;
      rec(axis - 1, depth + 1);
    }
  };
  rec(n - 1, 0);
  if (count == 1) {
    // Fibonacci directions on the unit sphere of the first three axes,
    // tilted into the remaining ones for n > 3.
    constexpr int kDirections = 64;
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kDirections; ++i) {
      const double z = 1.0 - (i + 0.5) * 2.0 / kDirections;
      const double r = std::sqrt(1.0 - z * z);
      MatrixXd b = MatrixXd::Zero(n, 1);
      b(0, 0) = r * std::cos(golden * i);
      b(1, 0) = r * std::sin(golden * i);
      b(2, 0) = z;
      for (int extra = 3; extra < n; ++extra) b(extra, 0) = 0.5 * std::cos((extra + 1) * i);
      out.push_back(b.normalized());
    }
  }
  return out;
}

// Richardson-extrapolated central difference of the normal field.
MatrixXd normal_derivative(const NormalFieldFn& field, const VectorXd& p, int axis,
                           double step) {
  auto central = [&](double h) {
    VectorXd plus = p;
    VectorXd minus = p;
    plus[axis] += h;
    minus[axis] -= h;
    return MatrixXd((field(plus) - field(minus)) / (2.0 * h));
  };
  return (4.0 * central(0.5 * step) - central(step)) / 3.0;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2 * pi);
  return a <= -pi ? a + 2 * pi : a;
}

MatrixXd rotation2(double theta) {
  MatrixXd g(2, 2);
  g << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return g;
}

}  // namespace

double ConnectionCoefficients::max_normal_connection() const {
  double m = 0.0;
  for (const auto& node : normal) {
    for (const auto& block : node) {
      if (block.size() > 0) m = std::max(m, block.cwiseAbs().maxCoeff());
    }
  }
  return m;
}

VectorXd generalized_cross(const MatrixXd& columns) {
  const Index n = columns.rows();
  VectorXd c(n);
  MatrixXd minor(n - 1, n - 1);
  for (Index i = 0; i < n; ++i) {
    Index r = 0;
    for (Index row = 0; row < n; ++row) {
      if (row == i) continue;
      minor.row(r++) = columns.row(row);
    }
    // cofactor along the appended last column, so det([columns c]) = |c|^2
    const double sign = ((i + n - 1) % 2 == 0) ? 1.0 : -1.0;
    c[i] = sign * minor.determinant();
  }
  return c;
}

NormalFieldFn default_normal_field(const Embedding& embedding, const SampleGrid& grid) {
  if (embedding.has_normals()) {
    return [embedding](const VectorXd& p) { return embedding.normals(p); };
  }
  const int n = embedding.ambient_dim();
  const int m = embedding.codim();

  if (m == 1) {
    // Oriented so that tr(gamma) <= 0 at the seed node (mean curvature
    // toward the centre is non-negative).
    auto raw = [embedding](const VectorXd& p) {
      return MatrixXd(generalized_cross(embedding.jet(p).first).normalized());
    };
    const JetD seed = embedding.jet(grid.params(0));
    const MatrixXd normal = raw(grid.params(0));
    const MatrixXd g = seed.first.transpose() * seed.first;
    const int k = embedding.intrinsic_dim();
    MatrixXd b(k, k);
    for (int a = 0; a < k; ++a) {
      for (int c = 0; c < k; ++c) b(a, c) = normal.col(0).dot(seed.d2(a, c));
    }
    const double sign = (g.inverse() * b).trace() < 0.0 ? -1.0 : 1.0;
    return [raw, sign](const VectorXd& p) { return MatrixXd(sign * raw(p)); };
  }

  std::vector<MatrixXd> jacobians;
  jacobians.reserve(grid.size());
  for (Index i = 0; i < grid.size(); ++i) jacobians.push_back(embedding.jet(grid.params(i)).first);

  MatrixXd best;
  double best_quality = 0.0;
  for (const MatrixXd& refs : reference_candidates(n, m - 1)) {
    double quality = 1.0;
    for (const MatrixXd& j : jacobians) {
      quality = std::min(quality, reference_quality(j, refs));
      if (quality < best_quality) break;
    }
    if (quality > best_quality) {
      best_quality = quality;
      best = refs;
    }
    if (quality >= kComfortable) break;
  }
  if (best_quality < kNearParallel) {
    throw Error("frames.build_frames",
                "no fixed ambient reference stays off the tangent space on this grid; "
                "supply an analytic normal frame");
  }
  // Same orientation rule as codimension one, applied to the last normal:
  // tr(gamma_last) <= 0 at the seed node.
  const JetD seed = embedding.jet(grid.params(0));
  const MatrixXd seed_normal = frame_from_reference(seed.first, best);
  const int k = embedding.intrinsic_dim();
  const MatrixXd ginv = (seed.first.transpose() * seed.first).inverse();
  double trace = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int c = 0; c < k; ++c) trace += ginv(c, a) * seed_normal.col(m - 1).dot(seed.d2(a, c));
  }
  const double sign = trace < 0.0 ? -1.0 : 1.0;
  return [embedding, best, sign, m](const VectorXd& p) {
    MatrixXd frame = frame_from_reference(embedding.jet(p).first, best);
    frame.col(m - 1) *= sign;
    return frame;
  };
}

FrameField build_frames(const Embedding& embedding, const SampleGrid& grid) {
  return build_frames(embedding, grid, default_normal_field(embedding, grid));
}

FrameField build_frames(const Embedding& embedding, const SampleGrid& grid,
                        NormalFieldFn normal_field) {
  if (grid.dim() != embedding.intrinsic_dim()) {
    throw ParameterError("frames.build_frames", "grid dimension differs from the embedding's");
  }
  FrameField f;
  f.grid = grid;
  f.ambient = embedding.ambient_dim();
  f.intrinsic = embedding.intrinsic_dim();
  f.normal_field = std::move(normal_field);
  const Index size = grid.size();
  f.tangent.resize(size);
  f.normal.resize(size);
  f.metric.resize(size);
  f.metric_det.resize(size);
  f.rotation = VectorXd::Zero(size);

  std::string failure;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < size; ++i) {
    const VectorXd p = grid.params(i);
    const JetD jet = embedding.jet(p);
    if (immersion_ratio(jet) <= 1e-10) {
#pragma omp critical
      failure = "rank deficiency at node " + std::to_string(i);
      continue;
    }
    f.tangent[i] = jet.first;
    f.metric[i] = jet.first.transpose() * jet.first;
    f.metric_det[i] = f.metric[i].determinant();
    f.normal[i] = f.normal_field(p);
    const double off = (f.normal[i].transpose() * jet.first).cwiseAbs().maxCoeff();
    if (off > 1e-10 * std::max(1.0, jet.first.norm())) {
#pragma omp critical
      failure = "normal frame not orthogonal to the tangent space at node " + std::to_string(i);
    }
  }
  if (!failure.empty()) throw Error("frames.build_frames", failure);
  return f;
}

ConnectionCoefficients connection_coefficients(const Embedding& embedding,
                                               const FrameField& frames) {
  if (frames.rotated) {
    throw Error("frames.connection_coefficients",
                "frames already rotated; compute coefficients on the unrotated field");
  }
  const int k = frames.intrinsic;
  const int m = frames.codim();
  const Index size = frames.size();
  ConnectionCoefficients c;
  c.weingarten.assign(size, std::vector<MatrixXd>(m));
  c.normal.assign(size, std::vector<MatrixXd>(k));
  c.second_form.assign(size, std::vector<MatrixXd>(m));

  std::vector<double> step(k);
  for (int a = 0; a < k; ++a) step[a] = 1e-3 * embedding.domain()[a].length() / (2 * pi);

#pragma omp parallel for schedule(static)
  for (Index node = 0; node < size; ++node) {
    const VectorXd p = frames.grid.params(node);
    const JetD jet = embedding.jet(p);
    const MatrixXd& tangent = frames.tangent[node];
    const MatrixXd& normal = frames.normal[node];
    const MatrixXd ginv = frames.metric[node].inverse();

    std::vector<MatrixXd> dn(k);
    for (int a = 0; a < k; ++a) dn[a] = normal_derivative(frames.normal_field, p, a, step[a]);

    for (int i = 0; i < m; ++i) {
      MatrixXd w(k, k);
      MatrixXd s(k, k);
      for (int a = 0; a < k; ++a) {
        w.col(a) = ginv * (tangent.transpose() * dn[a].col(i));
        for (int b = 0; b < k; ++b) s(b, a) = jet.d2(a, b).dot(normal.col(i));
      }
      c.weingarten[node][i] = w;
      c.second_form[node][i] = s;
    }
    for (int a = 0; a < k; ++a) c.normal[node][a] = dn[a].transpose() * normal;
  }
  return c;
}

HashimotoResult hashimoto_rotate(const ConnectionCoefficients& coeffs, const FrameField& frames) {
  const int m = frames.codim();
  const int k = frames.intrinsic;
  const SampleGrid& grid = frames.grid;
  HashimotoResult out{frames, coeffs, {}, 0.0};
  out.frames.rotated = true;
  if (m == 1) return out;
  if (m > 2) {
    throw Error("frames.hashimoto_rotate",
                "codimension > 2 is unsupported (needs path-ordered SO(n-k) transport)");
  }

  const Index size = grid.size();
  // a_axis(node) = gamma^2_{1 axis}; rotating by theta with d theta = -a
  // removes it.
  auto conn = [&](Index node, int axis) { return coeffs.normal[node][axis](0, 1); };
  VectorXd theta = VectorXd::Zero(size);
  std::vector<VectorXd> dtheta(k, VectorXd::Zero(size));

  const Index n0 = grid.count(0);
  const double h0 = grid.spacing(0);
  for (Index i = 0; i < n0; ++i) {
    const Index node = grid.flat({i, 0, 0});
    dtheta[0][node] = -conn(node, 0);
    if (i > 0) {
      const Index prev = grid.flat({i - 1, 0, 0});
      theta[node] = theta[prev] - 0.5 * h0 * (conn(prev, 0) + conn(node, 0));
    }
  }
  if (grid.periodic(0)) {
    const Index last = grid.flat({n0 - 1, 0, 0});
    const double closing = theta[last] - 0.5 * h0 * (conn(last, 0) + conn(0, 0));
    out.holonomy.push_back(wrap_angle(closing - theta[0]));
  }

  if (k == 2) {
    const Index n1 = grid.count(1);
    const double h1 = grid.spacing(1);
    // d_0 a_1 on the grid (a_1 is periodic wherever the axis is)
    auto d0_conn1 = [&](Index node) {
      const Index plus = grid.neighbor(node, 0, 1);
      const Index minus = grid.neighbor(node, 0, -1);
      if (plus >= 0 && minus >= 0) return (conn(plus, 1) - conn(minus, 1)) / (2 * h0);
      if (plus < 0) {
        const Index m2 = grid.neighbor(minus, 0, -1);
        return (3 * conn(node, 1) - 4 * conn(minus, 1) + conn(m2, 1)) / (2 * h0);
      }
      const Index p2 = grid.neighbor(plus, 0, 1);
      return (-3 * conn(node, 1) + 4 * conn(plus, 1) - conn(p2, 1)) / (2 * h0);
    };
    for (Index i = 0; i < n0; ++i) {
      const Index base = grid.flat({i, 0, 0});
      dtheta[1][base] = -conn(base, 1);
      double cross = 0.0;  // integral of d_0 a_1 along axis 1
      for (Index j = 1; j < n1; ++j) {
        const Index node = grid.flat({i, j, 0});
        const Index prev = grid.flat({i, j - 1, 0});
        theta[node] = theta[prev] - 0.5 * h1 * (conn(prev, 1) + conn(node, 1));
        cross += 0.5 * h1 * (d0_conn1(prev) + d0_conn1(node));
        dtheta[1][node] = -conn(node, 1);
        dtheta[0][node] = dtheta[0][base] - cross;
      }
    }
    if (grid.periodic(1)) {
      const Index last = grid.flat({0, n1 - 1, 0});
      const double closing = theta[last] - 0.5 * h1 * (conn(last, 1) + conn(0, 1));
      out.holonomy.push_back(wrap_angle(closing - theta[0]));
    }
  }

  double residual = 0.0;
  for (Index node = 0; node < size; ++node) {
    const MatrixXd g = rotation2(theta[node]);
    out.frames.normal[node] = frames.normal[node] * g;
    const double c = g(0, 0);
    const double s = g(1, 0);
    auto& w = out.coeffs.weingarten[node];
    auto& sf = out.coeffs.second_form[node];
    const MatrixXd w0 = w[0];
    const MatrixXd s0 = sf[0];
    w[0] = c * w0 + s * w[1];
    w[1] = -s * w0 + c * w[1];
    sf[0] = c * s0 + s * sf[1];
    sf[1] = -s * s0 + c * sf[1];
    for (int a = 0; a < k; ++a) {
      const double left = conn(node, a) + dtheta[a][node];
      auto& block = out.coeffs.normal[node][a];
      block << 0.0, left, -left, 0.0;
      residual = std::max(residual, std::abs(left));
    }
  }
  out.frames.rotation = theta;
  out.residual = residual;
  return out;
}

CurvatureData curvature_data(const Embedding& embedding, const FrameField& frames,
                             const ConnectionCoefficients& coeffs) {
  const Index size = frames.size();
  const int k = frames.intrinsic;
  const int m = frames.codim();
  CurvatureData d;
  if (k == 1) {
    if (m == 2 && !frames.rotated) {
      throw Error("frames.curvature_data", "complex curvature needs hashimoto_rotate first");
    }
    d.curvature.resize(size);
    d.torsion = VectorXd::Constant(size, std::numeric_limits<double>::quiet_NaN());
    d.complex_curvature.resize(size);
    for (Index i = 0; i < size; ++i) {
      const double g = frames.metric[i](0, 0);
      VectorXd comp(m);
      for (int a = 0; a < m; ++a) comp[a] = coeffs.second_form[i][a](0, 0) / g;
      d.curvature[i] = comp.norm();
      d.complex_curvature[i] = m == 2 ? std::complex<double>(comp[0], comp[1])
                                      : std::complex<double>(d.curvature[i], 0.0);
      if (frames.ambient == 3) {
        const JetD jet = embedding.jet(frames.grid.params(i));
        const Eigen::Vector3d y1 = jet.first.col(0);
        const Eigen::Vector3d y2 = jet.d2(0, 0);
        const Eigen::Vector3d y3 = jet.d3(0, 0, 0);
        const Eigen::Vector3d cr = y1.cross(y2);
        const double c2 = cr.squaredNorm();
        d.torsion[i] = c2 > 1e-24 * std::pow(y1.squaredNorm(), 3) ? cr.dot(y3) / c2 : 0.0;
      }
    }
    // Fix the integration constant of the torsion phase at the seed node, so
    // that kappa_C = kappa exp(i int_seed tau ds).
    if (m == 2 && std::abs(d.complex_curvature[0]) > 1e-12) {
      const std::complex<double> phase =
          std::conj(d.complex_curvature[0]) / std::abs(d.complex_curvature[0]);
      d.complex_curvature *= phase;
    }
    return d;
  }

  d.mean.resize(size);
  d.gauss.resize(size);
  d.mean_components.assign(m, VectorXd(size));
  for (Index i = 0; i < size; ++i) {
    double gauss = 0.0;
    double h2 = 0.0;
    for (int a = 0; a < m; ++a) {
      const MatrixXd& w = coeffs.weingarten[i][a];
      const double h = mean_curvature(w);
      d.mean_components[a][i] = h;
      h2 += h * h;
      gauss += w.determinant();
    }
    d.gauss[i] = gauss;
    d.mean[i] = m == 1 ? d.mean_components[0][i] : std::sqrt(h2);
  }
  if (m == 2) {
    d.complex_mean.resize(size);
    for (Index i = 0; i < size; ++i) {
      d.complex_mean[i] = {d.mean_components[0][i], d.mean_components[1][i]};
    }
  }
  return d;
}

FrameField rotate_normal_frame(const FrameField& frames, const MatrixXd& rotation) {
  if (frames.rotated) {
    throw Error("frames.rotate_normal_frame", "expects an unrotated frame field");
  }
  FrameField out = frames;
  for (auto& n : out.normal) n = n * rotation;
  auto field = frames.normal_field;
  out.normal_field = [field, rotation](const VectorXd& p) { return MatrixXd(field(p) * rotation); };
  return out;
}

}  // namespace tubeq
