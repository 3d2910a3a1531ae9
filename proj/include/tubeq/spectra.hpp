#pragma once

#include <Eigen/Core>
#include <complex>

#include "tubeq/operators.hpp"

namespace tubeq {

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // node-indexed columns, unit norm in the gauge's pairing
  Gauge gauge = Gauge::raw;
  Eigen::VectorXd weight;
  SampleGrid grid;
  // Largest ||A v - lambda v|| / (||v|| max(1, |lambda|)) over the pairs.
  double max_residual = 0.0;
};

struct EigenOptions {
  Index dense_cutoff = 1024;  // dense decomposition up to this many nodes
  double tolerance = 1e-8;    // relative residual per pair
  double symmetry_tolerance = 1e-10;
  int max_restarts = 200;
  unsigned seed = 20240611u;
};

// Lowest `count` eigenpairs of a real operator that is symmetric
// (half-density gauge) or self-adjoint in the weighted pairing (raw gauge).
// The sparse path runs block Lanczos with full reorthogonalisation on
// (S - sigma)^{-1}, sigma a certified lower bound found by Cholesky
// bisection. Degenerate clusters are rotated to a basis-independent
// representative and ordered by dominant Fourier index along axis 0.
Spectrum eigen_lowest(const RealOperator& op, Index count, const EigenOptions& options = {});

// sum conj(u) v sqrt(g) h^k in raw gauge, sum conj(u) v h^k in half-density.
std::complex<double> weighted_inner_product(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v,
                                            const RealOperator& op);
double weighted_inner_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                              const RealOperator& op);

// Index k in [0, n0/2] carrying the largest power of the DFT along axis 0.
Index dominant_fourier_index(const Eigen::VectorXd& v, const SampleGrid& grid);

}  // namespace tubeq
