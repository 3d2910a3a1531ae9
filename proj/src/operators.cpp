#include "tubeq/operators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "tubeq/error.hpp"
#include "tubeq/tubular.hpp"

namespace tubeq {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

std::vector<Boundary> boundaries(const SampleGrid& grid) {
  std::vector<Boundary> b;
  for (int a = 0; a < grid.dim(); ++a) b.push_back(grid.boundary(a));
  return b;
}

void require_dim(const MetricField& metric, const SampleGrid& grid, const char* where) {
  if (metric.dim() != grid.dim()) {
    throw ParameterError(where, "metric and grid dimensions differ");
  }
}

// sqrt(det g) at every node; throws on a node that is not positive definite.
VectorXd node_volume(const MetricField& metric, const SampleGrid& grid, const char* where) {
  VectorXd w(grid.size());
  Index bad = -1;
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < grid.size(); ++n) {
    const MatrixXd g = metric(grid.params(n));
    Eigen::LLT<MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
#pragma omp critical
      bad = bad < 0 ? n : std::min(bad, n);
      w[n] = 0.0;
      continue;
    }
    w[n] = std::sqrt(g.determinant());
  }
  if (bad >= 0) {
    throw Error(where, "metric not positive definite at node " + std::to_string(bad));
  }
  return w;
}

// sqrt(g) g^{aa} at a face point; a degenerate boundary face carries no flux.
double face_coefficient(const MetricField& metric, const VectorXd& p, int a, bool boundary,
                        const char* where) {
  const MatrixXd g = metric(p);
  const double det = g.determinant();
  if (!(det > 0.0)) {
    if (boundary) return 0.0;
    throw Error(where, "metric not positive definite on an interior face");
  }
  return std::sqrt(det) * g.inverse()(a, a);
}

// Central difference along `axis`, zero ghost outside non-periodic axes.
SpMat central_difference(const SampleGrid& grid, int axis) {
  std::vector<Triplet> t;
  const double inv = 1.0 / (2.0 * grid.spacing(axis));
  for (Index n = 0; n < grid.size(); ++n) {
    const Index up = grid.neighbor(n, axis, 1);
    const Index down = grid.neighbor(n, axis, -1);
    if (up >= 0) t.emplace_back(n, up, inv);
    if (down >= 0) t.emplace_back(n, down, -inv);
  }
  SpMat s(grid.size(), grid.size());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SpMat diagonal(const VectorXd& d) {
  SpMat m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Index i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

// Flux-form sum over axes of D_a^T c_a D_a; `coefficient(p, a, boundary)`
// returns the face coefficient. Dirichlet faces use the ghost value -u.
template <typename Coefficient>
SpMat flux_stiffness(const SampleGrid& grid, Coefficient&& coefficient) {
  const Index size = grid.size();
  const int k = grid.dim();
  // up[a][n]: face above node n; low[a][n]: lower boundary face (or 0).
  std::vector<VectorXd> up(k, VectorXd::Zero(size)), low(k, VectorXd::Zero(size));
  for (int a = 0; a < k; ++a) {
    const double h = grid.spacing(a);
#pragma omp parallel for schedule(static)
    for (Index n = 0; n < size; ++n) {
      VectorXd p = grid.params(n);
      const bool top = grid.neighbor(n, a, 1) < 0;
      p[a] += 0.5 * h;
      up[a][n] = coefficient(p, a, top) / (h * h);
      if (grid.neighbor(n, a, -1) < 0) {
        p[a] -= h;
        low[a][n] = coefficient(p, a, true) / (h * h);
      }
    }
  }
  std::vector<Triplet> t;
  t.reserve(size * (2 * k + 1) * 2);
  for (int a = 0; a < k; ++a) {
    for (Index n = 0; n < size; ++n) {
      const double c = up[a][n];
      const Index m = grid.neighbor(n, a, 1);
      if (m >= 0) {
        t.emplace_back(n, n, c);
        t.emplace_back(m, m, c);
        t.emplace_back(n, m, -c);
        t.emplace_back(m, n, -c);
      } else {
        t.emplace_back(n, n, 2.0 * c);
      }
      if (low[a][n] != 0.0) t.emplace_back(n, n, 2.0 * low[a][n]);
    }
  }
  SpMat s(size, size);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

template <typename Scalar>
double frobenius(const Eigen::SparseMatrix<Scalar>& m) {
  return m.norm();
}

}  // namespace

RealOperator laplace_beltrami(const MetricField& metric, const SampleGrid& grid) {
  constexpr const char* where = "operators.laplace_beltrami";
  require_dim(metric, grid, where);
  const VectorXd w = node_volume(metric, grid, where);

  SpMat k = flux_stiffness(grid, [&](const VectorXd& p, int a, bool boundary) {
    return face_coefficient(metric, p, a, boundary, where);
  });

  for (int a = 0; a < grid.dim(); ++a) {
    for (int b = a + 1; b < grid.dim(); ++b) {
      VectorXd c(grid.size());
#pragma omp parallel for schedule(static)
      for (Index n = 0; n < grid.size(); ++n) {
        const MatrixXd g = metric(grid.params(n));
        c[n] = w[n] * g.inverse()(a, b);
      }
      if (c.cwiseAbs().maxCoeff() == 0.0) continue;
      const SpMat sa = central_difference(grid, a);
      const SpMat sb = central_difference(grid, b);
      const SpMat cross = SpMat(sa.transpose()) * diagonal(c) * sb;
      k += cross + SpMat(cross.transpose());
    }
  }

  RealOperator op;
  op.grid = grid;
  op.matrix = diagonal(w.cwiseInverse()) * k;
  op.matrix.makeCompressed();
  op.gauge = Gauge::raw;
  op.weight = w;
  op.boundary = boundaries(grid);
  return op;
}

template <typename Scalar>
DiscreteOperator<Scalar> half_density_transform(const DiscreteOperator<Scalar>& op) {
  constexpr const char* where = "operators.half_density_transform";
  if (op.gauge != Gauge::raw) throw ParameterError(where, "operator is not in raw gauge");
  if (op.weight.size() != op.size() || !(op.weight.minCoeff() > 0.0)) {
    throw ParameterError(where, "weight must be strictly positive at every node");
  }
  const VectorXd s = op.weight.cwiseSqrt();
  DiscreteOperator<Scalar> out = op;
  for (Index col = 0; col < out.matrix.outerSize(); ++col) {
    for (typename DiscreteOperator<Scalar>::Matrix::InnerIterator it(out.matrix, col); it; ++it) {
      it.valueRef() *= s[it.row()] / s[col];
    }
  }
  out.gauge = Gauge::half_density;
  return out;
}

template <typename Scalar>
DiscreteOperator<Scalar> adjoint(const DiscreteOperator<Scalar>& op, const VectorXd& weight) {
  using Matrix = typename DiscreteOperator<Scalar>::Matrix;
  DiscreteOperator<Scalar> out = op;
  Matrix t = op.matrix.adjoint();
  if (op.gauge == Gauge::raw) {
    if (weight.size() != op.size()) {
      throw ParameterError("operators.adjoint", "weight does not match the grid");
    }
    for (Index col = 0; col < t.outerSize(); ++col) {
      for (typename Matrix::InnerIterator it(t, col); it; ++it) {
        it.valueRef() = it.value() * weight[col] / weight[it.row()];
      }
    }
  }
  out.matrix = t;
  return out;
}

template <typename Scalar>
DiscreteOperator<Scalar> adjoint(const DiscreteOperator<Scalar>& op) {
  return adjoint(op, op.weight);
}

template <typename Scalar>
double symmetry_residual(const Eigen::SparseMatrix<Scalar>& matrix) {
  const double norm = frobenius(matrix);
  if (norm == 0.0) return 0.0;
  const Eigen::SparseMatrix<Scalar> d = matrix - Eigen::SparseMatrix<Scalar>(matrix.adjoint());
  return frobenius(d) / norm;
}

template <typename Scalar>
double weighted_self_adjoint_residual(const DiscreteOperator<Scalar>& op) {
  using Matrix = typename DiscreteOperator<Scalar>::Matrix;
  const VectorXd w = op.pairing();
  const Matrix dw = diagonal(w).cast<Scalar>();
  const Matrix wa = dw * op.matrix;
  const double norm = frobenius(wa);
  if (norm == 0.0) return 0.0;
  const Matrix d = wa - Matrix(op.matrix.adjoint()) * dw;
  return frobenius(d) / norm;
}

RealOperator sa_connection(int axis, const MetricField& metric, const SampleGrid& grid) {
  constexpr const char* where = "operators.sa_connection";
  require_dim(metric, grid, where);
  if (axis < 0 || axis >= grid.dim()) throw ParameterError(where, "axis out of range", axis);
  const VectorXd w = node_volume(metric, grid, where);
  const VectorXd q = w.cwiseSqrt();
  RealOperator op;
  op.grid = grid;
  op.matrix = diagonal(q.cwiseInverse()) * central_difference(grid, axis) * diagonal(q);
  op.matrix.makeCompressed();
  op.gauge = Gauge::raw;
  op.weight = w;
  op.boundary = boundaries(grid);
  return op;
}

ComplexOperator momentum_operator(int axis, const MetricField& metric, const SampleGrid& grid) {
  const RealOperator d = sa_connection(axis, metric, grid);
  ComplexOperator op;
  op.grid = d.grid;
  op.matrix = d.matrix.cast<std::complex<double>>() * std::complex<double>(0.0, 1.0);
  op.gauge = d.gauge;
  op.weight = d.weight;
  op.boundary = d.boundary;
  return op;
}

VectorXd connection_drift(int axis, const MetricField& metric, const SampleGrid& grid) {
  constexpr const char* where = "operators.connection_drift";
  require_dim(metric, grid, where);
  if (axis < 0 || axis >= grid.dim()) throw ParameterError(where, "axis out of range", axis);
  VectorXd c(grid.size());
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < grid.size(); ++n) {
    const MetricJet j = metric.jet(grid.params(n));
    c[n] = 0.25 * j.g.ldlt().solve(j.dg[axis]).trace();
  }
  return c;
}

VectorXd sa_expansion_potential(const MetricField& metric, const SampleGrid& grid) {
  require_dim(metric, grid, "operators.beltrami_sa_expansion");
  const int k = grid.dim();
  VectorXd z(grid.size());
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < grid.size(); ++n) {
    const MetricJet j = metric.jet(grid.params(n));
    const MatrixXd gi = j.g.inverse();
    VectorXd c(k);
    for (int b = 0; b < k; ++b) c[b] = 0.25 * (gi * j.dg[b]).trace();
    double value = c.dot(gi * c);
    for (int a = 0; a < k; ++a) {
      const MatrixXd dgi = -gi * j.dg[a] * gi;
      for (int b = 0; b < k; ++b) {
        const double dc =
            0.25 * (-(gi * j.dg[a] * gi * j.dg[b]).trace() + (gi * j.ddg[a * k + b]).trace());
        value += dgi(a, b) * c[b] + gi(a, b) * dc;
      }
    }
    z[n] = value;
  }
  return z;
}

RealOperator beltrami_sa_expansion(const MetricField& metric, const SampleGrid& grid) {
  constexpr const char* where = "operators.beltrami_sa_expansion";
  require_dim(metric, grid, where);
  const VectorXd w = node_volume(metric, grid, where);
  const VectorXd q = w.cwiseSqrt();

  SpMat inner = flux_stiffness(grid, [&](const VectorXd& p, int a, bool boundary) {
    const MatrixXd g = metric(p);
    if (!(g.determinant() > 0.0)) {
      if (boundary) return 0.0;
      throw Error(where, "metric not positive definite on an interior face");
    }
    return g.inverse()(a, a);
  });
  for (int a = 0; a < grid.dim(); ++a) {
    for (int b = a + 1; b < grid.dim(); ++b) {
      VectorXd c(grid.size());
      for (Index n = 0; n < grid.size(); ++n) c[n] = metric(grid.params(n)).inverse()(a, b);
      if (c.cwiseAbs().maxCoeff() == 0.0) continue;
      const SpMat sa = central_difference(grid, a);
      const SpMat sb = central_difference(grid, b);
      inner -= sa * diagonal(c) * sb + sb * diagonal(c) * sa;
    }
  }

  RealOperator op;
  op.grid = grid;
  op.matrix = diagonal(q.cwiseInverse()) * inner * diagonal(q) +
              diagonal(sa_expansion_potential(metric, grid));
  op.matrix.makeCompressed();
  op.gauge = Gauge::raw;
  op.weight = w;
  op.boundary = boundaries(grid);
  return op;
}

HamiltonianParts submanifold_hamiltonian_parts(const Embedding& embedding,
                                               const SampleGrid& grid) {
  if (embedding.intrinsic_dim() != grid.dim()) {
    throw ParameterError("operators.submanifold_hamiltonian",
                         "grid dimension differs from the embedding");
  }
  HamiltonianParts parts;
  parts.frames = build_frames(embedding, grid);
  parts.coeffs = connection_coefficients(embedding, parts.frames);
  // V_eff is invariant under normal-frame rotations, so codimension > 2
  // keeps the unrotated frame.
  if (parts.frames.codim() == 2) {
    HashimotoResult h = hashimoto_rotate(parts.coeffs, parts.frames);
    parts.frames = std::move(h.frames);
    parts.coeffs = std::move(h.coeffs);
  }
  parts.potential = effective_potential(parts.coeffs, parts.frames);
  parts.laplacian = laplace_beltrami(MetricField::from_embedding(embedding), grid);
  parts.hamiltonian = half_density_transform(parts.laplacian);
  parts.hamiltonian.matrix += diagonal(parts.potential);
  parts.hamiltonian.matrix.makeCompressed();
  return parts;
}

RealOperator submanifold_hamiltonian(const Embedding& embedding, const SampleGrid& grid) {
  return submanifold_hamiltonian_parts(embedding, grid).hamiltonian;
}

RealOperator raw_hamiltonian(const HamiltonianParts& parts) {
  RealOperator op = parts.laplacian;
  op.matrix += diagonal(parts.potential);
  op.matrix.makeCompressed();
  return op;
}

namespace {

template <typename Scalar>
void write_market(const DiscreteOperator<Scalar>& op, const std::filesystem::path& path,
                  bool complex) {
  std::ofstream out(path);
  if (!out) throw Error("operators.write_matrix_market", "cannot open " + path.string());
  typename DiscreteOperator<Scalar>::Matrix m = op.matrix;
  m.makeCompressed();
  out << "%%MatrixMarket matrix coordinate " << (complex ? "complex" : "real") << " general\n";
  out << "% gauge " << (op.gauge == Gauge::raw ? "raw" : "half_density") << "\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  char buf[96];
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (typename DiscreteOperator<Scalar>::Matrix::InnerIterator it(m, col); it; ++it) {
      if constexpr (std::is_same_v<Scalar, double>) {
        std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row() + 1),
                      static_cast<long>(col + 1), it.value());
      } else {
        std::snprintf(buf, sizeof buf, "%ld %ld %.17g %.17g\n", static_cast<long>(it.row() + 1),
                      static_cast<long>(col + 1), it.value().real(), it.value().imag());
      }
      out << buf;
    }
  }
}

}  // namespace

void write_matrix_market(const RealOperator& op, const std::filesystem::path& path) {
  write_market(op, path, false);
}

void write_matrix_market(const ComplexOperator& op, const std::filesystem::path& path) {
  write_market(op, path, true);
}

template RealOperator half_density_transform(const RealOperator&);
template ComplexOperator half_density_transform(const ComplexOperator&);
template RealOperator adjoint(const RealOperator&);
template ComplexOperator adjoint(const ComplexOperator&);
template RealOperator adjoint(const RealOperator&, const VectorXd&);
template ComplexOperator adjoint(const ComplexOperator&, const VectorXd&);
template double weighted_self_adjoint_residual(const RealOperator&);
template double weighted_self_adjoint_residual(const ComplexOperator&);
template double symmetry_residual(const Eigen::SparseMatrix<double>&);
template double symmetry_residual(const Eigen::SparseMatrix<std::complex<double>>&);

}  // namespace tubeq
