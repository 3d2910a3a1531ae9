#include "tubeq/squeeze.hpp"

#include <Eigen/QR>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "tubeq/error.hpp"
#include "tubeq/frames.hpp"
#include "tubeq/tubular.hpp"

namespace tubeq {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr const char* kWhere = "squeeze.tube_dirichlet_spectrum";
constexpr double kMaxCurvatureWidth = 0.9;
constexpr Index kMinAcross = 16;

struct CurveFrames {
  SampleGrid grid;
  FrameField frames;
  ConnectionCoefficients coeffs;
};

CurveFrames parallel_frames(const Embedding& curve, Index nodes) {
  CurveFrames c;
  c.grid = SampleGrid(curve.domain(), {nodes});
  c.frames = build_frames(curve, c.grid);
  c.coeffs = connection_coefficients(curve, c.frames);
  if (c.frames.codim() == 2) {
    HashimotoResult h = hashimoto_rotate(c.coeffs, c.frames);
    c.frames = std::move(h.frames);
    c.coeffs = std::move(h.coeffs);
  }
  return c;
}

// Index of the normal spanning the plane of a planar curve, or -1.
int in_plane_normal(const Embedding& curve, const CurveFrames& c) {
  if (c.frames.codim() == 1) return 0;
  const Index size = c.grid.size();
  const VectorXd y0 = curve.position(c.grid.params(0));
  double extent = 0.0;
  for (Index n = 0; n < size; ++n) {
    extent = std::max(extent, (curve.position(c.grid.params(n)) - y0).norm());
  }
  for (int j = 0; j < c.frames.codim(); ++j) {
    const VectorXd n0 = c.frames.normal[0].col(j);
    bool constant = true;
    for (Index n = 0; n < size && constant; ++n) {
      constant = (c.frames.normal[n].col(j) - n0).norm() <= 1e-8 &&
                 std::abs((curve.position(c.grid.params(n)) - y0).dot(n0)) <=
                     1e-8 * (1.0 + extent);
    }
    if (constant) return 1 - j;
  }
  return -1;
}

}  // namespace

double transverse_energy(double epsilon) {
  const double k = std::acos(-1.0) / (2.0 * epsilon);
  return k * k;
}

double discrete_transverse_energy(double epsilon, Index nodes) {
  const double h = 2.0 * epsilon / static_cast<double>(nodes);
  const double s = std::sin(std::acos(-1.0) * h / (4.0 * epsilon));
  return 4.0 * s * s / (h * h);
}

double min_focal_radius(const Embedding& curve, Index nodes) {
  const CurveFrames c = parallel_frames(curve, nodes);
  double r = std::numeric_limits<double>::infinity();
  for (Index n = 0; n < c.grid.size(); ++n) r = std::min(r, focal_radius(c.coeffs, n));
  return r;
}

TubeSpectrum tube_dirichlet_spectrum(const Embedding& curve, double epsilon,
                                     const SqueezeGrid& grid, Index levels,
                                     const EigenOptions& options) {
  if (curve.intrinsic_dim() != 1) {
    throw ParameterError(kWhere, "only curves are supported; surface tubes are not implemented");
  }
  if (curve.ambient_dim() < 2 || curve.ambient_dim() > 3) {
    throw ParameterError(kWhere, "curve must lie in E^2 or E^3");
  }
  if (!(epsilon > 0.0)) throw ParameterError(kWhere, "epsilon must be positive");
  if (grid.across < kMinAcross) {
    throw ParameterError(kWhere, "transverse direction under-resolved: need at least " +
                                     std::to_string(kMinAcross) + " nodes");
  }

  const CurveFrames c = parallel_frames(curve, grid.along);
  double curvature = 0.0;
  for (Index n = 0; n < c.grid.size(); ++n) {
    curvature = std::max(curvature, 1.0 / focal_radius(c.coeffs, n));
  }
  if (!(curvature * epsilon < kMaxCurvatureWidth)) {
    throw Error(kWhere, "curvature * epsilon = " + std::to_string(curvature * epsilon) +
                            " reaches the focal limit 0.9");
  }

  std::vector<int> directions;
  const int planar = in_plane_normal(curve, c);
  if (planar >= 0) {
    directions = {planar};
  } else {
    directions = {0, 1};
  }
  const int dims = static_cast<int>(directions.size());
  const int m = c.frames.codim();

  std::vector<GridAxis> axes{{curve.domain()[0], grid.along}};
  for (int d = 0; d < dims; ++d) axes.push_back({{-epsilon, epsilon, false}, grid.across});
  const SampleGrid tube(axes);
  const Index size = tube.size();

  auto offset = [&](const VectorXd& p) {
    VectorXd q = VectorXd::Zero(m);
    for (int d = 0; d < dims; ++d) q[directions[d]] = p[1 + d];
    return q;
  };
  auto stretch = [&](Index node, const VectorXd& p) {
    const Index along = tube.multi(node)[0];
    return tube_frame(c.frames, c.coeffs, along, offset(p)).metric(0, 0);
  };

  // sqrt(G), the s-flux coefficient sqrt(G) G^{ss} = 1/sqrt(G_ss), and the
  // q-face coefficients sqrt(G) on the upper and lower boundary faces.
  VectorXd vol(size), cs(size);
  std::vector<VectorXd> up(dims, VectorXd::Zero(size)), low(dims, VectorXd::Zero(size));
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < size; ++n) {
    try {
      const VectorXd p = tube.params(n);
      const double gss = stretch(n, p);
      vol[n] = std::sqrt(gss);
      cs[n] = 1.0 / vol[n];
      for (int d = 0; d < dims; ++d) {
        const double h = tube.spacing(1 + d);
        VectorXd f = p;
        f[1 + d] += 0.5 * h;
        up[d][n] = std::sqrt(stretch(n, f));
        if (tube.neighbor(n, 1 + d, -1) < 0) {
          f[1 + d] -= h;
          low[d][n] = std::sqrt(stretch(n, f));
        }
      }
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Triplet> t;
  t.reserve(size * (4 * dims + 6));
  const double hs = tube.spacing(0);
  for (Index n = 0; n < size; ++n) {
    const Index next = tube.neighbor(n, 0, 1);
    if (next >= 0) {
      const double k = 0.5 * (cs[n] + cs[next]) / (hs * hs);
      t.emplace_back(n, n, k);
      t.emplace_back(next, next, k);
      t.emplace_back(n, next, -k);
      t.emplace_back(next, n, -k);
    }
    // Non-periodic ends: face value by linear extrapolation from the two
    // nearest nodes, ghost -u.
    for (int step : {1, -1}) {
      if (tube.neighbor(n, 0, step) >= 0) continue;
      const Index inner = tube.neighbor(n, 0, -step);
      const double face = inner >= 0 ? 1.5 * cs[n] - 0.5 * cs[inner] : cs[n];
      t.emplace_back(n, n, 2.0 * face / (hs * hs));
    }
    for (int d = 0; d < dims; ++d) {
      const double h2 = tube.spacing(1 + d) * tube.spacing(1 + d);
      const double k = up[d][n] / h2;
      const Index above = tube.neighbor(n, 1 + d, 1);
      if (above >= 0) {
        t.emplace_back(n, n, k);
        t.emplace_back(above, above, k);
        t.emplace_back(n, above, -k);
        t.emplace_back(above, n, -k);
      } else {
        t.emplace_back(n, n, 2.0 * k);
      }
      if (low[d][n] != 0.0) t.emplace_back(n, n, 2.0 * low[d][n] / h2);
    }
  }
  SpMat stiffness(size, size);
  stiffness.setFromTriplets(t.begin(), t.end());

  RealOperator op;
  op.grid = tube;
  op.matrix = vol.cwiseInverse().asDiagonal() * stiffness;
  op.matrix.makeCompressed();
  op.gauge = Gauge::raw;
  op.weight = vol;
  for (int a = 0; a < tube.dim(); ++a) op.boundary.push_back(tube.boundary(a));

  const Spectrum spectrum = eigen_lowest(op, levels, options);

  TubeSpectrum out;
  out.epsilon = epsilon;
  out.levels = spectrum.eigenvalues;
  out.cross_dims = dims;
  out.transverse = dims * discrete_transverse_energy(epsilon, grid.across);
  out.transverse_continuum = dims * transverse_energy(epsilon);
  out.nodes = size;
  return out;
}

SqueezeRun squeeze_run(const Embedding& curve, const std::vector<double>& epsilons,
                       const SqueezeGrid& grid, Index levels, const EigenOptions& options) {
  SqueezeRun run;
  run.runs.resize(epsilons.size());
  std::exception_ptr failure;
  const int count = static_cast<int>(epsilons.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    try {
      run.runs[i] = tube_dirichlet_spectrum(curve, epsilons[i], grid, levels, options);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return run;
}

SqueezeLimit squeeze_extrapolate(const std::vector<double>& epsilons, const MatrixXd& values) {
  constexpr const char* where = "squeeze.squeeze_extrapolate";
  const Index n = static_cast<Index>(epsilons.size());
  if (n < 3) throw ParameterError(where, "need at least three epsilons");
  if (values.rows() != n) throw ParameterError(where, "one row of values per epsilon required");
  for (Index i = 0; i < n; ++i) {
    if (!(epsilons[i] > 0.0)) throw ParameterError(where, "epsilons must be positive", int(i));
  }
  const Index levels = values.cols();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SqueezeLimit out;
  Index smallest = 0;
  bool decreasing = true;
  for (Index i = 1; i < n; ++i) {
    if (epsilons[i] < epsilons[smallest]) smallest = i;
    if (!(epsilons[i] < epsilons[i - 1])) decreasing = false;
  }
  if (!decreasing) {
    out.limit = values.row(smallest).transpose();
    out.slope = VectorXd::Constant(levels, nan);
    out.error = VectorXd::Constant(levels, nan);
    out.extrapolated = false;
    out.monotone = false;
    out.note = "epsilons not strictly decreasing; extrapolation refused, raw values returned";
    return out;
  }
  const double ratio = epsilons[0] / epsilons[1];
  for (Index i = 1; i + 1 < n; ++i) {
    if (std::abs(epsilons[i] / epsilons[i + 1] - ratio) > 1e-6 * ratio) {
      throw ParameterError(where, "epsilons must form a geometric progression", int(i + 1));
    }
  }

  for (Index l = 0; l < levels; ++l) {
    int sign = 0;
    for (Index i = 1; i < n; ++i) {
      const double d = values(i, l) - values(i - 1, l);
      const int s = (d > 0.0) - (d < 0.0);
      if (s != 0 && sign != 0 && s != sign) out.monotone = false;
      if (s != 0) sign = s;
    }
  }

  // Interpolating polynomial in eps through the given rows.
  auto fit = [&](Index first, Index l) {
    const Index r = n - first;
    MatrixXd v(r, r);
    VectorXd y(r);
    for (Index i = 0; i < r; ++i) {
      double p = 1.0;
      for (Index j = 0; j < r; ++j, p *= epsilons[first + i]) v(i, j) = p;
      y[i] = values(first + i, l);
    }
    return VectorXd(v.colPivHouseholderQr().solve(y));
  };
  out.limit.resize(levels);
  out.slope.resize(levels);
  out.error.resize(levels);
  for (Index l = 0; l < levels; ++l) {
    const VectorXd all = fit(0, l);
    const VectorXd fine = fit(1, l);
    out.limit[l] = all[0];
    out.slope[l] = all[1];
    out.error[l] = std::abs(all[0] - fine[0]);
  }
  out.extrapolated = true;
  if (!out.monotone) out.note = "levels not monotone in epsilon; outside the asymptotic regime";
  return out;
}

SqueezeLimit squeeze_extrapolate(const SqueezeRun& run) {
  std::vector<double> eps;
  const Index n = static_cast<Index>(run.runs.size());
  const Index levels = n > 0 ? run.runs[0].levels.size() : 0;
  MatrixXd values(n, levels);
  for (Index i = 0; i < n; ++i) {
    eps.push_back(run.runs[i].epsilon);
    if (run.runs[i].levels.size() != levels) {
      throw ParameterError("squeeze.squeeze_extrapolate", "runs carry different level counts");
    }
    values.row(i) = run.runs[i].subtracted().transpose();
  }
  return squeeze_extrapolate(eps, values);
}

}  // namespace tubeq
