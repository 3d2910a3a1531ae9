#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tubeq/error.hpp"
#include "tubeq/frames.hpp"
#include "tubeq/geometry.hpp"

using namespace tubeq;
using Eigen::VectorXd;

namespace {

VectorXd point(std::initializer_list<double> v) {
  VectorXd p(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

std::vector<std::pair<std::string, std::vector<double>>> catalog() {
  return {{"circle", {1.3}},      {"ellipse", {2.0, 1.0}}, {"helix", {3.0, 4.0}},
          {"torus", {2.0, 1.0}},  {"sphere", {2.0}},       {"flat_torus4", {1.5}}};
}

VectorXd random_point(const Embedding& e, std::mt19937_64& rng) {
  VectorXd p(e.intrinsic_dim());
  for (int a = 0; a < e.intrinsic_dim(); ++a) {
    const Axis& ax = e.domain()[a];
    // keep 1% clear of open ends so the stencils stay inside
    const double margin = ax.periodic ? 0.0 : 0.01 * ax.length();
    std::uniform_real_distribution<double> u(ax.lo + margin, ax.hi - margin);
    p[a] = u(rng);
  }
  return p;
}

double relative(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tubeq_test_" + name);
}

}  // namespace

TEST_CASE("grid: node placement, wrapping and indexing") {
  const SampleGrid g({{{0.0, 1.0, false}, 10}, {{0.0, 2.0, true}, 8}});
  CHECK(g.size() == 80);
  CHECK(g.spacing(0) == doctest::Approx(0.1));
  CHECK(g.node(0, 0) == doctest::Approx(0.05));  // cell centred
  CHECK(g.node(1, 0) == doctest::Approx(0.0));   // vertex
  CHECK(g.face(0, -1) == doctest::Approx(0.0));
  CHECK(g.face(0, 9) == doctest::Approx(1.0));
  const Index n = g.flat({9, 7, 0});
  CHECK(g.neighbor(n, 0, 1) == -1);
  CHECK(g.neighbor(n, 1, 1) == g.flat({9, 0, 0}));
  for (Index i = 0; i < g.size(); ++i) CHECK(g.flat(g.multi(i)) == i);
  CHECK(g.cell_volume() == doctest::Approx(0.1 * 0.25));
}

TEST_CASE("grid: rejects fewer than eight nodes per axis") {
  CHECK_THROWS_AS(SampleGrid({{{0.0, 1.0, true}, 7}}), ParameterError);
}

TEST_CASE("catalog: circle(1) at s = 0") {
  const JetD j = catalog_shape("circle", {1.0}).jet(point({0.0}));
  CHECK(relative(j.position, Eigen::Vector3d(1, 0, 0)) < 1e-15);
  CHECK(relative(j.first.col(0), Eigen::Vector3d(0, 1, 0)) < 1e-15);
}

TEST_CASE("catalog: helix(3,4) is unit speed and matches differences of its position") {
  const Embedding e = catalog_shape("helix", {3.0, 4.0});
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const VectorXd p = random_point(e, rng);
    const JetD j = e.jet(p);
    CHECK(j.first.col(0).norm() == doctest::Approx(1.0).epsilon(1e-14));
    const oracle::Map y = [&](const VectorXd& s) { return e.position(s); };
    CHECK(relative(j.first, oracle::jacobian(y, p)) < 1e-9);
    CHECK(relative(j.d2(0, 0), oracle::second(y, p, 0)) < 1e-7);
  }
}

TEST_CASE("catalog: sphere(2) equator point") {
  const JetD j = catalog_shape("sphere", {2.0}).jet(point({oracle::pi / 2, 0.0}));
  CHECK(relative(j.position, Eigen::Vector3d(2, 0, 0)) < 1e-15);
}

TEST_CASE("catalog: rejects bad names and parameters with an index") {
  CHECK_THROWS_AS(catalog_shape("klein", {1.0}), ParameterError);
  try {
    catalog_shape("circle", {-1.0});
    FAIL("expected rejection");
  } catch (const ParameterError& e) {
    CHECK(e.index() == 0);
  }
  try {
    catalog_shape("ellipse", {1.0, 0.0});
    FAIL("expected rejection");
  } catch (const ParameterError& e) {
    CHECK(e.index() == 1);
  }
  try {
    catalog_shape("torus", {1.0, 2.0});
    FAIL("expected rejection");
  } catch (const ParameterError& e) {
    CHECK(e.index() == 0);
    CHECK(std::string(e.what()).find("A > a") != std::string::npos);
  }
  CHECK_THROWS_AS(catalog_shape("torus", {1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(catalog_shape("sphere", {}), ParameterError);
}

TEST_CASE("catalog: immersion, symmetric partials and exact-vs-difference jets") {
  std::mt19937_64 rng(42);
  for (const auto& [name, params] : catalog()) {
    CAPTURE(name);
    const Embedding e = catalog_shape(name, params);
    double worst_fd = 0.0, worst_sym = 0.0, worst_rank = 1.0;
    for (int i = 0; i < 100; ++i) {
      const VectorXd p = random_point(e, rng);
      const JetD exact = e.jet(p);
      const JetD fd = jets_fd(e, p, 3);
      worst_rank = std::min(worst_rank, immersion_ratio(exact));
      worst_fd = std::max(worst_fd, relative(fd.first, exact.first));
      const int k = e.intrinsic_dim();
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          worst_fd = std::max(worst_fd, relative(fd.d2(a, b), exact.d2(a, b)));
          worst_sym = std::max(worst_sym, relative(exact.d2(a, b), exact.d2(b, a)));
          for (int c = 0; c < k; ++c) {
            worst_sym = std::max(worst_sym, relative(exact.d3(a, b, c), exact.d3(c, b, a)));
          }
        }
      }
    }
    CHECK(worst_rank > 1e-10);
    CHECK(worst_fd < 1e-7);
    CHECK(worst_sym < 1e-9);
  }
}

TEST_CASE("catalog: periodic endpoints agree") {
  for (const auto& [name, params] : catalog()) {
    CAPTURE(name);
    const Embedding e = catalog_shape(name, params);
    for (int a = 0; a < e.intrinsic_dim(); ++a) {
      if (!e.domain()[a].periodic) continue;
      VectorXd lo = VectorXd::Constant(e.intrinsic_dim(), 0.3);
      VectorXd hi = lo;
      lo[a] = e.domain()[a].lo;
      hi[a] = e.domain()[a].hi;
      const JetD x = e.jet(lo), y = e.jet(hi);
      CHECK(relative(x.position, y.position) < 1e-10);
      CHECK(relative(x.first, y.first) < 1e-10);
      for (std::size_t i = 0; i < x.third.size(); ++i) CHECK(relative(x.third[i], y.third[i]) < 1e-10);
    }
  }
}

TEST_CASE("jets_fd: accuracy, fourth-order convergence and domain check") {
  const Embedding circle = catalog_shape("circle", {1.0});
  const VectorXd p = point({0.7});
  CHECK((jets_fd(circle, p, 1).first - circle.jet(p).first).cwiseAbs().maxCoeff() < 1e-8);

  const Embedding helix = catalog_shape("helix", {3.0, 4.0});
  const VectorXd s = point({4.0});
  CHECK(relative(jets_fd(helix, s, 2).d2(0, 0), helix.jet(s).d2(0, 0)) < 1e-7);

  const double e1 = (jets_fd(circle, p, 1, 0.2).first - circle.jet(p).first).norm();
  const double e2 = (jets_fd(circle, p, 1, 0.1).first - circle.jet(p).first).norm();
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));

  CHECK_THROWS_AS(jets_fd(helix, point({-1.0}), 1), ParameterError);
  CHECK_THROWS_AS(jets_fd(helix, s, 4), ParameterError);
}

TEST_CASE("load_sampled_curve: 256-point circle has unit curvature") {
  const auto path = temp_file("circle256.csv");
  oracle::write_circle_csv(path, 256, 1.0, 0.0, true);
  const Embedding e = load_sampled_curve(path);
  CHECK(e.domain()[0].periodic);
  CHECK(e.domain()[0].length() == doctest::Approx(2 * oracle::pi).epsilon(1e-12));
  const SampleGrid g(e.domain(), {256});
  const FrameField f = build_frames(e, g);
  const ConnectionCoefficients c = connection_coefficients(e, f);
  const HashimotoResult h = hashimoto_rotate(c, f);
  const CurvatureData d = curvature_data(e, h.frames, h.coeffs);
  CHECK((d.curvature.array() - 1.0).abs().maxCoeff() < 1e-5);
  std::filesystem::remove(path);
}

TEST_CASE("load_sampled_curve: a shifted origin gives the same curvature field") {
  const auto a = temp_file("circle_a.csv");
  const auto b = temp_file("circle_b.csv");
  oracle::write_circle_csv(a, 128, 1.0, 0.0, true);
  oracle::write_circle_csv(b, 128, 1.0, 0.9, true);
  auto curvature = [](const std::filesystem::path& path) {
    const Embedding e = load_sampled_curve(path);
    const SampleGrid g(e.domain(), {128});
    const FrameField f = build_frames(e, g);
    const HashimotoResult h = hashimoto_rotate(connection_coefficients(e, f), f);
    return curvature_data(e, h.frames, h.coeffs).curvature;
  };
  CHECK((curvature(a) - curvature(b)).cwiseAbs().maxCoeff() < 1e-9);

  const Embedding circle = catalog_shape("circle", {1.0});
  const FrameField f0 = build_frames(circle, SampleGrid(circle.domain(), {64}));
  const FrameField f1 =
      build_frames(circle, SampleGrid({{{0.5, 0.5 + 2 * oracle::pi, true}, 64}}));
  const HashimotoResult h0 = hashimoto_rotate(connection_coefficients(circle, f0), f0);
  const HashimotoResult h1 = hashimoto_rotate(connection_coefficients(circle, f1), f1);
  CHECK((curvature_data(circle, h0.frames, h0.coeffs).curvature -
         curvature_data(circle, h1.frames, h1.coeffs).curvature)
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("load_sampled_curve: open curves and E^4 samples") {
  const auto path = temp_file("arc.csv");
  oracle::write_circle_csv(path, 64, 2.0, 0.0, false);
  const Embedding e = load_sampled_curve(path);
  CHECK_FALSE(e.domain()[0].periodic);
  CHECK(e.ambient_dim() == 3);

  const auto path4 = temp_file("curve4.csv");
  {
    std::ofstream out(path4);
    out << "s,x,y,z,w\n";
    for (int i = 0; i < 40; ++i) {
      const double t = 0.05 * i;
      out << t << ',' << std::cos(t) << ',' << std::sin(t) << ',' << t << ',' << t * t << '\n';
    }
  }
  const Embedding e4 = load_sampled_curve(path4);
  CHECK(e4.ambient_dim() == 4);
  CHECK(e4.codim() == 3);
  std::filesystem::remove(path);
  std::filesystem::remove(path4);
}

TEST_CASE("load_sampled_curve: rejects bad files") {
  auto expect = [](const std::string& text, const std::string& message) {
    const auto path = temp_file("bad.csv");
    {
      std::ofstream out(path);
      out << text;
    }
    try {
      load_sampled_curve(path);
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(message) != std::string::npos);
    }
    std::filesystem::remove(path);
  };
  expect("s,x,y,z\n0,1,0,0\n1,0,1,0\n2,-1,0,0\n3,0,-1,0\n", "too few samples");
  std::string rows = "s,x,y,z\n";
  for (int i = 0; i < 20; ++i) rows += std::to_string(i == 10 ? 3 : i) + ",0," + std::to_string(i) + ",0\n";
  expect(rows, "parameter not increasing");
  expect("t,x,y,z\n", "malformed CSV");
  std::string ragged = "s,x,y,z\n";
  for (int i = 0; i < 20; ++i) ragged += std::to_string(i) + ",0,1\n";
  expect(ragged, "malformed CSV");
  CHECK_THROWS_AS(load_sampled_curve(temp_file("does_not_exist.csv")), Error);
}
