#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tubeq/geometry.hpp"
#include "tubeq/spectra.hpp"

namespace tubeq {

struct SqueezeGrid {
  Index along = 512;  // nodes along the curve
  Index across = 32;  // nodes across each transverse direction
};

// Dirichlet spectrum of the flat ambient Laplacian on the tube |q_i| <= eps
// around a curve, in tube coordinates with the exact (untruncated) metric.
// Planar curves give a strip (one transverse direction), space curves a
// square cross-section in the parallel normal frame.
struct TubeSpectrum {
  double epsilon = 0.0;
  Eigen::VectorXd levels;       // lowest eigenvalues of -Delta_ambient
  int cross_dims = 1;
  double transverse = 0.0;      // discrete transverse ground energy, summed over directions
  double transverse_continuum = 0.0;  // cross_dims (pi / (2 eps))^2
  Index nodes = 0;

  Eigen::VectorXd subtracted() const {
    return (levels.array() - transverse).matrix();
  }
};

struct SqueezeRun {
  std::vector<TubeSpectrum> runs;  // epsilon descending
};

struct SqueezeLimit {
  Eigen::VectorXd limit;   // per level; raw smallest-eps values when refused
  Eigen::VectorXd slope;   // linear coefficient of the fit in eps
  Eigen::VectorXd error;   // change when the largest eps is dropped
  bool extrapolated = false;
  // Subtracted levels vary monotonically in eps (asymptotic regime).
  bool monotone = true;
  std::string note;
};

// (pi / (2 eps))^2: ground energy of the interval [-eps, eps].
double transverse_energy(double epsilon);
// Ground eigenvalue of the cell-centred Dirichlet stencil on `nodes` nodes
// across [-eps, eps].
double discrete_transverse_energy(double epsilon, Index nodes);

// Smallest focal radius over a sampled curve.
double min_focal_radius(const Embedding& curve, Index nodes);

TubeSpectrum tube_dirichlet_spectrum(const Embedding& curve, double epsilon,
                                     const SqueezeGrid& grid, Index levels,
                                     const EigenOptions& options = {});

// Independent eps values run in parallel.
SqueezeRun squeeze_run(const Embedding& curve, const std::vector<double>& epsilons,
                       const SqueezeGrid& grid, Index levels, const EigenOptions& options = {});

// Polynomial extrapolation to eps = 0 of values(i, level) sampled at
// epsilons[i]. Needs at least three epsilons in geometric progression.
// Epsilons that are not strictly decreasing: refused, flagged, raw values
// returned. Non-monotone values: extrapolated but flagged.
SqueezeLimit squeeze_extrapolate(const std::vector<double>& epsilons,
                                 const Eigen::MatrixXd& values);
SqueezeLimit squeeze_extrapolate(const SqueezeRun& run);

}  // namespace tubeq
