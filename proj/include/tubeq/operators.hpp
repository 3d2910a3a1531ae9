#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <complex>
#include <filesystem>
#include <vector>

#include "tubeq/frames.hpp"
#include "tubeq/geometry.hpp"
#include "tubeq/grid.hpp"
#include "tubeq/metric.hpp"

namespace tubeq {

enum class Gauge { raw, half_density };

// Grid-indexed operator. In raw gauge the matrix acts on functions and is
// self-adjoint for the pairing sum conj(u) v weight h^k; in half-density
// gauge it acts on g^{1/4}-scaled functions and is plainly symmetric.
template <typename Scalar>
struct DiscreteOperator {
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;

  SampleGrid grid;
  Matrix matrix;
  Gauge gauge = Gauge::raw;
  Eigen::VectorXd weight;  // sqrt(det g) per node
  std::vector<Boundary> boundary;

  Index size() const { return grid.size(); }
  // Quadrature weights of the gauge's inner product.
  Eigen::VectorXd pairing() const {
    const double h = grid.cell_volume();
    if (gauge == Gauge::half_density) return Eigen::VectorXd::Constant(size(), h);
    return weight * h;
  }
};

using RealOperator = DiscreteOperator<double>;
using ComplexOperator = DiscreteOperator<std::complex<double>>;

// -Delta in flux form: face coefficients sqrt(g) g^{aa} at the faces,
// symmetric central cross terms, ghost value -u on Dirichlet faces.
// Raw gauge; positive semidefinite; throws on a non-positive-definite node.
RealOperator laplace_beltrami(const MetricField& metric, const SampleGrid& grid);

// diag(g^{1/4}) A diag(g^{-1/4}).
template <typename Scalar>
DiscreteOperator<Scalar> half_density_transform(const DiscreteOperator<Scalar>& op);

// g^{-1/4} d_a g^{1/4} with central differences (zero ghost).
RealOperator sa_connection(int axis, const MetricField& metric, const SampleGrid& grid);
// sqrt(-1) times sa_connection.
ComplexOperator momentum_operator(int axis, const MetricField& metric, const SampleGrid& grid);
// 1/4 d_a log g at the nodes, from the metric jet.
Eigen::VectorXd connection_drift(int axis, const MetricField& metric, const SampleGrid& grid);

// W^{-1} A^H W in raw gauge, A^H in half-density gauge.
template <typename Scalar>
DiscreteOperator<Scalar> adjoint(const DiscreteOperator<Scalar>& op);
// Same with an explicit weight (sqrt g per node) instead of op.weight.
template <typename Scalar>
DiscreteOperator<Scalar> adjoint(const DiscreteOperator<Scalar>& op,
                                 const Eigen::VectorXd& weight);

// ||W A - A^H W||_F / ||W A||_F with W = diag(weight h^k).
template <typename Scalar>
double weighted_self_adjoint_residual(const DiscreteOperator<Scalar>& op);
// ||A - A^H||_F / ||A||_F.
template <typename Scalar>
double symmetry_residual(const Eigen::SparseMatrix<Scalar>& matrix);

// -Delta rebuilt as -nabla^SA g^{-1} nabla^SA + Z with
// Z = d_a(g^{ab} c_b) + g^{ab} c_a c_b, c = 1/4 d log g.
RealOperator beltrami_sa_expansion(const MetricField& metric, const SampleGrid& grid);
// The zeroth-order field Z at the nodes.
Eigen::VectorXd sa_expansion_potential(const MetricField& metric, const SampleGrid& grid);

// Every intermediate of the Hamiltonian pipeline.
struct HamiltonianParts {
  FrameField frames;
  ConnectionCoefficients coeffs;
  Eigen::VectorXd potential;
  RealOperator laplacian;    // raw gauge
  RealOperator hamiltonian;  // half-density gauge
};

// -Delta_S + V_eff in half-density gauge.
HamiltonianParts submanifold_hamiltonian_parts(const Embedding& embedding,
                                               const SampleGrid& grid);
RealOperator submanifold_hamiltonian(const Embedding& embedding, const SampleGrid& grid);
// Raw-gauge counterpart diag(1/sqrt g) K + diag(V).
RealOperator raw_hamiltonian(const HamiltonianParts& parts);

void write_matrix_market(const RealOperator& op, const std::filesystem::path& path);
void write_matrix_market(const ComplexOperator& op, const std::filesystem::path& path);

}  // namespace tubeq
