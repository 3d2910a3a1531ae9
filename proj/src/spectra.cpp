#include "tubeq/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tubeq/error.hpp"

namespace tubeq {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr const char* kWhere = "spectra.eigen_lowest";
// Probe seed for degenerate clusters; independent of the Lanczos start.
constexpr unsigned kProbeSeed = 977u;

MatrixXd random_block(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

// Orthonormalise `w` against `basis` (twice) and itself; rank-deficient
// columns are replaced by fresh random directions.
MatrixXd orthonormal_extension(const MatrixXd& basis, MatrixXd w, std::mt19937_64& rng) {
  for (int pass = 0; pass < 2; ++pass) {
    if (basis.cols() > 0) w -= basis * (basis.transpose() * w);
  }
  MatrixXd out(w.rows(), 0);
  for (Index j = 0; j < w.cols(); ++j) {
    VectorXd x = w.col(j);
    const double start = x.norm();
    for (int attempt = 0; attempt < 4; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) x -= basis * (basis.transpose() * x);
        if (out.cols() > 0) x -= out * (out.transpose() * x);
      }
      const double norm = x.norm();
      if (norm > 1e-10 * std::max(start, 1e-300)) {
        out.conservativeResize(Eigen::NoChange, out.cols() + 1);
        out.col(out.cols() - 1) = x / norm;
        break;
      }
      x = random_block(w.rows(), 1, rng);
    }
  }
  return out;
}

double gershgorin_lower(const SpMat& s) {
  VectorXd diag = VectorXd::Zero(s.rows()), off = VectorXd::Zero(s.rows());
  for (Index col = 0; col < s.outerSize(); ++col) {
    for (SpMat::InnerIterator it(s, col); it; ++it) {
      if (it.row() == col) {
        diag[col] = it.value();
      } else {
        off[it.row()] += std::abs(it.value());
      }
    }
  }
  return (diag - off).minCoeff();
}

SpMat identity(Index n) {
  SpMat i(n, n);
  i.setIdentity();
  return i;
}

// Largest sigma (to a relative resolution of 1e-3) with S - sigma
// positive definite, moved one bracket width further down.
double lower_shift(const SpMat& s) {
  const Index n = s.rows();
  const SpMat id = identity(n);
  Eigen::SimplicialLLT<SpMat> llt;
  llt.analyzePattern(s);
  auto definite = [&](double x) {
    llt.factorize(s - x * id);
    return llt.info() == Eigen::Success;
  };
  double lo = gershgorin_lower(s) - 1.0;
  double hi = s.diagonal().minCoeff();
  while (!definite(lo)) lo -= std::max(1.0, 2.0 * std::abs(lo));
  if (definite(hi)) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-3 * std::max({1.0, std::abs(lo), std::abs(hi)});
       ++it) {
    const double mid = 0.5 * (lo + hi);
    (definite(mid) ? lo : hi) = mid;
  }
  return lo - (hi - lo);
}

struct Pairs {
  VectorXd values;
  MatrixXd vectors;
};

Pairs dense_lowest(const SpMat& s, Index count) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(MatrixXd(s), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error(kWhere, "dense decomposition failed");
  return {solver.eigenvalues().head(count), solver.eigenvectors().leftCols(count)};
}

Pairs lanczos_lowest(const SpMat& s, Index count, const EigenOptions& options) {
  const Index n = s.rows();
  const double sigma = lower_shift(s);
  Eigen::SimplicialLLT<SpMat> llt(s - sigma * identity(n));
  if (llt.info() != Eigen::Success) throw Error(kWhere, "shifted factorisation failed");

  const Index block = std::min<Index>(n, std::clamp<Index>(count, 2, 8));
  const Index keep = std::min<Index>(n, count + block);
  const Index max_dim = std::min<Index>(n, std::max<Index>(keep + 6 * block, 4 * count + 40));

  std::mt19937_64 rng(options.seed);
  MatrixXd q = orthonormal_extension(MatrixXd(n, 0), random_block(n, block, rng), rng);
  MatrixXd op_q = llt.solve(q);
  MatrixXd next = op_q;

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    while (q.cols() < max_dim) {
      MatrixXd grow = orthonormal_extension(q, next, rng);
      grow.conservativeResize(Eigen::NoChange, std::min<Index>(grow.cols(), max_dim - q.cols()));
      if (grow.cols() == 0) break;
      const MatrixXd op_grow = llt.solve(grow);
      const Index old = q.cols();
      q.conservativeResize(Eigen::NoChange, old + grow.cols());
      op_q.conservativeResize(Eigen::NoChange, old + grow.cols());
      q.rightCols(grow.cols()) = grow;
      op_q.rightCols(grow.cols()) = op_grow;
      next = op_grow;
    }
    MatrixXd t = q.transpose() * op_q;
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(t);
    const Index m = t.rows();
    const Index take = std::min(keep, m);
    // Largest theta of the inverse gives the lowest eigenvalues.
    MatrixXd z(m, take);
    VectorXd theta(take);
    for (Index j = 0; j < take; ++j) {
      z.col(j) = ritz.eigenvectors().col(m - 1 - j);
      theta[j] = ritz.eigenvalues()[m - 1 - j];
    }
    MatrixXd y = q * z;
    MatrixXd op_y = op_q * z;

    // One more inverse application damps the high-frequency rounding that
    // S would amplify, then Rayleigh-Ritz in S itself.
    const MatrixXd purified = Eigen::HouseholderQR<MatrixXd>(op_y).householderQ() *
                              MatrixXd::Identity(n, take);
    const MatrixXd s_p = s * purified;
    MatrixXd small = purified.transpose() * s_p;
    small = 0.5 * (small + small.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> rr(small);

    Pairs out{VectorXd(count), MatrixXd(n, count)};
    bool converged = true;
    for (Index j = 0; j < count; ++j) {
      const double lambda = rr.eigenvalues()[j];
      const VectorXd v = purified * rr.eigenvectors().col(j);
      const double r = (s_p * rr.eigenvectors().col(j) - lambda * v).norm();
      out.values[j] = lambda;
      out.vectors.col(j) = v;
      if (r > options.tolerance * std::max(1.0, std::abs(lambda))) converged = false;
    }
    if (converged || m == n) return out;

    // Thick restart: keep the Ritz block, expand from its residuals.
    q = y;
    op_q = op_y;
    next = op_y.leftCols(std::min(block, take)) -
           y.leftCols(std::min(block, take)) * theta.head(std::min(block, take)).asDiagonal();
  }
  throw Error(kWhere, "Lanczos iteration did not converge");
}

// Basis-independent representative of a degenerate cluster: project
// seeded probes onto the cluster and orthonormalise in order.
MatrixXd canonical_cluster(const MatrixXd& y) {
  std::mt19937_64 rng(kProbeSeed);
  const MatrixXd probes = random_block(y.rows(), y.cols(), rng);
  MatrixXd b = y * (y.transpose() * probes);
  for (Index j = 0; j < b.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) b.col(j) -= b.col(i).dot(b.col(j)) * b.col(i);
    }
    b.col(j).normalize();
  }
  return b;
}

}  // namespace

Index dominant_fourier_index(const VectorXd& v, const SampleGrid& grid) {
  const Index n0 = grid.count(0);
  const Index slices = grid.size() / n0;
  Index best = 0;
  double best_power = -1.0;
  const double pi = std::acos(-1.0);
  for (Index k = 0; k <= n0 / 2; ++k) {
    double power = 0.0;
    for (Index s = 0; s < slices; ++s) {
      std::complex<double> acc = 0.0;
      for (Index j = 0; j < n0; ++j) {
        acc += v[s * n0 + j] * std::polar(1.0, -2.0 * pi * static_cast<double>(j * k % n0) /
                                                   static_cast<double>(n0));
      }
      power += std::norm(acc);
    }
    if (power > best_power * (1.0 + 1e-9)) {
      best_power = power;
      best = k;
    }
  }
  return best;
}

Spectrum eigen_lowest(const RealOperator& op, Index count, const EigenOptions& options) {
  const Index n = op.size();
  if (op.matrix.rows() != n || op.matrix.cols() != n) {
    throw ParameterError(kWhere, "matrix does not match the grid");
  }
  if (count < 1 || count > n) throw ParameterError(kWhere, "count must lie in [1, dimension]");
  if (op.weight.size() != n) throw ParameterError(kWhere, "weight does not match the grid");

  const double asym = op.gauge == Gauge::raw ? weighted_self_adjoint_residual(op)
                                             : symmetry_residual(op.matrix);
  if (!(asym <= options.symmetry_tolerance)) {
    throw Error(kWhere, "operator is not self-adjoint in its gauge (residual " +
                            std::to_string(asym) + ")");
  }

  // S = D^{1/2} A D^{-1/2} with D the pairing weights.
  const VectorXd d = op.pairing();
  const VectorXd root = d.cwiseSqrt();
  SpMat s = root.asDiagonal() * op.matrix * root.cwiseInverse().asDiagonal();
  s = 0.5 * (s + SpMat(s.transpose()));
  s.makeCompressed();

  Pairs pairs = n <= options.dense_cutoff ? dense_lowest(s, count)
                                          : lanczos_lowest(s, count, options);

  // Degenerate clusters.
  for (Index i = 0; i < count;) {
    Index j = i + 1;
    while (j < count && pairs.values[j] - pairs.values[i] <=
                            1e-7 * std::max(1.0, std::abs(pairs.values[i]))) {
      ++j;
    }
    if (j - i > 1) {
      MatrixXd c = canonical_cluster(pairs.vectors.middleCols(i, j - i));
      std::vector<Index> order(j - i);
      std::vector<Index> freq(j - i);
      std::iota(order.begin(), order.end(), 0);
      for (Index c0 = 0; c0 < j - i; ++c0) {
        freq[c0] = dominant_fourier_index(root.cwiseInverse().cwiseProduct(c.col(c0)), op.grid);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](Index a, Index b) { return freq[a] < freq[b]; });
      for (Index c0 = 0; c0 < j - i; ++c0) pairs.vectors.col(i + c0) = c.col(order[c0]);
    }
    i = j;
  }

  Spectrum out;
  out.eigenvalues = pairs.values;
  out.eigenvectors.resize(n, count);
  out.gauge = op.gauge;
  out.weight = op.weight;
  out.grid = op.grid;
  // Sign: positive overlap with a fixed probe. A largest-entry rule would
  // tie on symmetric grids (antipodal extrema of a Fourier mode).
  std::mt19937_64 sign_rng(kProbeSeed + 1);
  const VectorXd sign_probe = random_block(n, 1, sign_rng);
  for (Index j = 0; j < count; ++j) {
    VectorXd y = pairs.vectors.col(j);
    y.normalize();
    if (y.dot(sign_probe) < 0.0) y = -y;
    const double r = (s * y - pairs.values[j] * y).norm() / std::max(1.0, std::abs(pairs.values[j]));
    out.max_residual = std::max(out.max_residual, r);
    out.eigenvectors.col(j) = y.cwiseQuotient(root);
  }
  return out;
}

std::complex<double> weighted_inner_product(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v,
                                            const RealOperator& op) {
  if (u.size() != op.size() || v.size() != op.size()) {
    throw ParameterError("spectra.weighted_inner_product", "vectors do not match the grid");
  }
  const VectorXd w = op.pairing();
  std::complex<double> acc = 0.0;
  for (Index i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * v[i] * w[i];
  return acc;
}

double weighted_inner_product(const VectorXd& u, const VectorXd& v, const RealOperator& op) {
  if (u.size() != op.size() || v.size() != op.size()) {
    throw ParameterError("spectra.weighted_inner_product", "vectors do not match the grid");
  }
  return (u.array() * v.array() * op.pairing().array()).sum();
}

}  // namespace tubeq
