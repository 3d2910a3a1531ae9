#include "doctest.h"
#include "oracles.hpp"
#include "tubeq/error.hpp"
#include "tubeq/squeeze.hpp"

using namespace tubeq;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("transverse ground energies") {
  CHECK(transverse_energy(0.05) == doctest::Approx(std::pow(10 * oracle::pi, 2)));
  CHECK(transverse_energy(0.05) == doctest::Approx(986.96).epsilon(1e-5));
  // the discrete stencil converges to the continuum from below at O(h^2)
  const double e16 = discrete_transverse_energy(0.05, 16);
  const double e32 = discrete_transverse_energy(0.05, 32);
  CHECK(e16 < e32);
  CHECK(e32 < transverse_energy(0.05));
  CHECK((transverse_energy(0.05) - e16) / (transverse_energy(0.05) - e32) ==
        doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("focal radius of a circle is its radius") {
  CHECK(min_focal_radius(catalog_shape("circle", {2.0}), 64) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(min_focal_radius(catalog_shape("helix", {3.0, 4.0}), 64) ==
        doctest::Approx(25.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("straight segment of length pi: separable rectangle") {
  const Embedding seg = catalog_shape("segment", {oracle::pi});
  const TubeSpectrum t = tube_dirichlet_spectrum(seg, 0.1, {64, 16}, 2);
  CHECK(t.cross_dims == 1);
  CHECK(t.levels[0] == doctest::Approx(transverse_energy(0.1) + 1.0).epsilon(5e-3));
  // with the discrete transverse energy removed only the axial level is left
  CHECK(t.subtracted()[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(t.subtracted()[1] == doctest::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("circle(1), eps = 0.05: subtracted ground level near -1/4") {
  const TubeSpectrum t = tube_dirichlet_spectrum(catalog_shape("circle", {1.0}), 0.05, {256, 16}, 1);
  CHECK(t.subtracted()[0] > -0.26);
  CHECK(t.subtracted()[0] < -0.22);
  CHECK(t.transverse_continuum == doctest::Approx(986.96).epsilon(1e-5));
}

TEST_CASE("extrapolation of synthetic data") {
  const std::vector<double> eps{0.2, 0.1, 0.05};
  SUBCASE("exact linear model") {
    MatrixXd v(3, 2);
    for (int i = 0; i < 3; ++i) {
      v(i, 0) = -0.25 + 0.3 * eps[i];
      v(i, 1) = 0.75 - 0.1 * eps[i];
    }
    const SqueezeLimit l = squeeze_extrapolate(eps, v);
    CHECK(l.extrapolated);
    CHECK(l.monotone);
    CHECK(std::abs(l.limit[0] + 0.25) < 1e-12);
    CHECK(std::abs(l.limit[1] - 0.75) < 1e-12);
    CHECK(l.slope[0] == doctest::Approx(0.3));
    CHECK(std::abs(l.error[0]) < 1e-12);
  }
  SUBCASE("quadratic model is exact with three points") {
    MatrixXd v(3, 1);
    for (int i = 0; i < 3; ++i) v(i, 0) = 1.0 - eps[i] + 2.0 * eps[i] * eps[i];
    const SqueezeLimit l = squeeze_extrapolate(eps, v);
    CHECK(std::abs(l.limit[0] - 1.0) < 1e-12);
    CHECK(l.error[0] > 1e-3);  // the two-point linear fit misses the curvature
  }
  SUBCASE("non-monotone values are flagged") {
    MatrixXd v(3, 1);
    v << 1.0, 3.0, 2.0;
    const SqueezeLimit l = squeeze_extrapolate(eps, v);
    CHECK(l.extrapolated);
    CHECK_FALSE(l.monotone);
    CHECK_FALSE(l.note.empty());
  }
  SUBCASE("unordered epsilons: refused with the smallest-eps values") {
    MatrixXd v(3, 1);
    v << 1.0, 2.0, 3.0;
    const SqueezeLimit l = squeeze_extrapolate({0.1, 0.2, 0.05}, v);
    CHECK_FALSE(l.extrapolated);
    CHECK(l.limit[0] == 3.0);
    CHECK(l.note.find("refused") != std::string::npos);
  }
  SUBCASE("malformed schedules") {
    CHECK_THROWS_AS(squeeze_extrapolate({0.2, 0.1}, MatrixXd::Zero(2, 1)), ParameterError);
    CHECK_THROWS_AS(squeeze_extrapolate({0.2, 0.1, 0.07}, MatrixXd::Zero(3, 1)), ParameterError);
    CHECK_THROWS_AS(squeeze_extrapolate({0.2, 0.1, -0.05}, MatrixXd::Zero(3, 1)), ParameterError);
    CHECK_THROWS_AS(squeeze_extrapolate(eps, MatrixXd::Zero(2, 1)), ParameterError);
  }
}

TEST_CASE("circle(1) squeeze limit") {
  const SqueezeRun run =
      squeeze_run(catalog_shape("circle", {1.0}), {0.2, 0.1, 0.05}, {256, 16}, 1);
  REQUIRE(run.runs.size() == 3);
  CHECK(run.runs[0].epsilon == 0.2);
  const SqueezeLimit l = squeeze_extrapolate(run);
  CHECK(l.extrapolated);
  CHECK(std::abs(l.limit[0] + 0.25) < 1e-2);
}

TEST_CASE("short helix squeeze limit matches the 1D effective operator") {
  const double length = 10.0;
  const Embedding helix = catalog_shape("helix", {3.0, 4.0, length});
  const double focal = min_focal_radius(helix, 64);
  const SqueezeRun run =
      squeeze_run(helix, {0.2 * focal, 0.1 * focal, 0.05 * focal}, {48, 16}, 1);
  CHECK(run.runs[0].cross_dims == 2);
  const SqueezeLimit l = squeeze_extrapolate(run);
  const double expected = std::pow(oracle::pi / length, 2) - 0.25 * 0.12 * 0.12;
  CHECK(std::abs(l.limit[0] - expected) < 2e-2);
}

TEST_CASE("tube spectrum preconditions") {
  const Embedding circle = catalog_shape("circle", {1.0});
  CHECK_THROWS_AS(tube_dirichlet_spectrum(circle, 0.1, {64, 15}, 1), ParameterError);
  CHECK_THROWS_AS(tube_dirichlet_spectrum(circle, 0.0, {64, 16}, 1), ParameterError);
  CHECK_THROWS_AS(tube_dirichlet_spectrum(circle, 0.95, {64, 16}, 1), Error);
  CHECK_THROWS_AS(tube_dirichlet_spectrum(catalog_shape("sphere", {1.0}), 0.1, {64, 16}, 1),
                  ParameterError);
  CHECK_THROWS_AS(tube_dirichlet_spectrum(catalog_shape("flat_torus4", {1.0}), 0.1, {64, 16}, 1),
                  ParameterError);
  CHECK_THROWS_AS(squeeze_run(circle, {0.2, 0.1, 0.95}, {64, 16}, 1), Error);
}
