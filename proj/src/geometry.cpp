#include "tubeq/geometry.hpp"

#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "spline.hpp"
#include "tubeq/error.hpp"

namespace tubeq {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::numbers::pi;

// d^n/dx^n cos x and sin x
double dcos(double x, int n) { return std::cos(x + n * pi / 2); }
double dsin(double x, int n) { return std::sin(x + n * pi / 2); }

// Fill every jet entry from a callback giving the partial derivative with
// `counts[a]` derivatives along axis a.
template <typename Partial>
JetD jet_from_partials(int ambient, int k, Partial&& partial) {
  JetD j(ambient, k);
  j.position = partial(std::array<int, 2>{0, 0});
  for (int a = 0; a < k; ++a) {
    std::array<int, 2> c{0, 0};
    ++c[a];
    j.first.col(a) = partial(c);
    for (int b = 0; b < k; ++b) {
      auto c2 = c;
      ++c2[b];
      j.d2(a, b) = partial(c2);
      for (int d = 0; d < k; ++d) {
        auto c3 = c2;
        ++c3[d];
        j.d3(a, b, d) = partial(c3);
      }
    }
  }
  return j;
}

void require_positive(const std::vector<double>& p, std::size_t count, const std::string& name) {
  if (p.size() < count) {
    throw ParameterError("geometry.catalog_shape",
                         name + " needs " + std::to_string(count) + " parameter(s)",
                         static_cast<int>(p.size()));
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !std::isfinite(p[i])) {
      throw ParameterError("geometry.catalog_shape",
                           name + " parameter " + std::to_string(i) + " must be positive",
                           static_cast<int>(i));
    }
  }
}

void require_count(const std::vector<double>& p, std::size_t lo, std::size_t hi,
                   const std::string& name) {
  if (p.size() < lo || p.size() > hi) {
    throw ParameterError("geometry.catalog_shape",
                         name + " takes " + std::to_string(lo) +
                             (lo == hi ? "" : "-" + std::to_string(hi)) + " parameter(s)",
                         static_cast<int>(std::min(p.size(), hi)));
  }
  require_positive(p, lo, name);
}

Embedding circle(double r) {
  return Embedding("circle", 3, {{0.0, 2 * pi * r, true}}, [r](const VectorXd& p) {
    const double t = p[0] / r;
    return jet_from_partials(3, 1, [&](std::array<int, 2> c) {
      const int n = c[0];
      const double scale = r * std::pow(r, -n);
      return VectorXd{{scale * dcos(t, n), scale * dsin(t, n), 0.0}};
    });
  });
}

Embedding ellipse(double a, double b) {
  return Embedding("ellipse", 3, {{0.0, 2 * pi, true}}, [a, b](const VectorXd& p) {
    return jet_from_partials(3, 1, [&](std::array<int, 2> c) {
      return VectorXd{{a * dcos(p[0], c[0]), b * dsin(p[0], c[0]), 0.0}};
    });
  });
}

// Arclength parametrisation, s in [0, L].
Embedding helix(double a, double b, double length) {
  const double c = std::hypot(a, b);
  return Embedding("helix", 3, {{0.0, length, false}}, [a, b, c](const VectorXd& p) {
    const double t = p[0] / c;
    return jet_from_partials(3, 1, [&](std::array<int, 2> k) {
      const int n = k[0];
      const double scale = a * std::pow(c, -n);
      const double z = n == 0 ? b * t : (n == 1 ? b / c : 0.0);
      return VectorXd{{scale * dcos(t, n), scale * dsin(t, n), z}};
    });
  });
}

Embedding torus(double big, double small) {
  return Embedding("torus", 3, {{0.0, 2 * pi, true}, {0.0, 2 * pi, true}},
                   [big, small](const VectorXd& p) {
                     const double u = p[0];
                     const double v = p[1];
                     return jet_from_partials(3, 2, [&](std::array<int, 2> c) {
                       const double r = c[1] == 0 ? big + small * std::cos(v)
                                                  : small * dcos(v, c[1]);
                       const double z = c[0] == 0 ? small * dsin(v, c[1]) : 0.0;
                       return VectorXd{{r * dcos(u, c[0]), r * dsin(u, c[0]), z}};
                     });
                   });
}

// (theta, phi): theta polar in [0, pi], phi azimuthal, periodic.
Embedding sphere(double radius) {
  return Embedding("sphere", 3, {{0.0, pi, false}, {0.0, 2 * pi, true}},
                   [radius](const VectorXd& p) {
                     const double th = p[0];
                     const double ph = p[1];
                     return jet_from_partials(3, 2, [&](std::array<int, 2> c) {
                       const double s = radius * dsin(th, c[0]);
                       const double z = c[1] == 0 ? radius * dcos(th, c[0]) : 0.0;
                       return VectorXd{{s * dcos(ph, c[1]), s * dsin(ph, c[1]), z}};
                     });
                   });
}

// Product of two circles of radius a in E^4; flat, with an exact normal
// frame pointing toward each circle's centre.
Embedding flat_torus4(double a) {
  auto jet = [a](const VectorXd& p) {
    return jet_from_partials(4, 2, [&](std::array<int, 2> c) {
      VectorXd y = VectorXd::Zero(4);
      if (c[1] == 0) y.head<2>() << a * dcos(p[0], c[0]), a * dsin(p[0], c[0]);
      if (c[0] == 0) y.tail<2>() << a * dcos(p[1], c[1]), a * dsin(p[1], c[1]);
      return y;
    });
  };
  auto normals = [](const VectorXd& p) {
    MatrixXd n = MatrixXd::Zero(4, 2);
    n.col(0).head<2>() << -std::cos(p[0]), -std::sin(p[0]);
    n.col(1).tail<2>() << -std::cos(p[1]), -std::sin(p[1]);
    return n;
  };
  return Embedding("flat_torus4", 4, {{0.0, 2 * pi, true}, {0.0, 2 * pi, true}}, jet, normals);
}

Embedding segment(double length) {
  return Embedding("segment", 3, {{0.0, length, false}}, [](const VectorXd& p) {
    JetD j(3, 1);
    j.position << p[0], 0.0, 0.0;
    j.first.col(0) << 1.0, 0.0, 0.0;
    return j;
  });
}

Embedding plane(double lx, double ly) {
  return Embedding("plane", 3, {{0.0, lx, false}, {0.0, ly, false}}, [](const VectorXd& p) {
    JetD j(3, 2);
    j.position << p[0], p[1], 0.0;
    j.first(0, 0) = 1.0;
    j.first(1, 1) = 1.0;
    return j;
  });
}

// Central-difference weights for the m-th derivative, O(step^2).
std::vector<std::pair<int, double>> stencil(int m) {
  switch (m) {
    case 0: return {{0, 1.0}};
    case 1: return {{-1, -0.5}, {1, 0.5}};
    case 2: return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    default: return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
  }
}

VectorXd central_partial(const Embedding& e, const VectorXd& p, const std::array<int, 2>& counts,
                         const VectorXd& step) {
  const int k = e.intrinsic_dim();
  const auto s0 = stencil(counts[0]);
  const auto s1 = k > 1 ? stencil(counts[1]) : std::vector<std::pair<int, double>>{{0, 1.0}};
  VectorXd acc = VectorXd::Zero(e.ambient_dim());
  for (const auto& [o0, w0] : s0) {
    for (const auto& [o1, w1] : s1) {
      VectorXd q = p;
      q[0] += o0 * step[0];
      if (k > 1) q[1] += o1 * step[1];
      acc += (w0 * w1) * e.position(q);
    }
  }
  double denom = std::pow(step[0], counts[0]);
  if (k > 1) denom *= std::pow(step[1], counts[1]);
  return acc / denom;
}

}  // namespace

Embedding::Embedding(std::string name, int ambient, std::vector<Axis> domain, JetFn jet,
                     NormalFn normals)
    : name_(std::move(name)), ambient_(ambient), domain_(std::move(domain)),
      jet_(std::move(jet)), normals_(std::move(normals)) {
  if (domain_.empty() || domain_.size() > 2) {
    throw ParameterError("geometry.Embedding", "intrinsic dimension must be 1 or 2");
  }
  if (ambient_ < 2 || ambient_ <= intrinsic_dim()) {
    throw ParameterError("geometry.Embedding", "ambient dimension must exceed intrinsic");
  }
}

bool Embedding::contains(const VectorXd& params) const {
  for (int a = 0; a < intrinsic_dim(); ++a) {
    const auto& ax = domain_[a];
    if (!ax.periodic && (params[a] < ax.lo || params[a] > ax.hi)) return false;
  }
  return true;
}

std::vector<std::string> catalog_names() {
  return {"circle", "ellipse", "helix", "torus", "sphere", "flat_torus4", "segment", "plane"};
}

Embedding catalog_shape(const std::string& name, const std::vector<double>& p) {
  if (name == "circle") {
    require_count(p, 1, 1, name);
    return circle(p[0]);
  }
  if (name == "ellipse") {
    require_count(p, 2, 2, name);
    return ellipse(p[0], p[1]);
  }
  if (name == "helix") {
    require_count(p, 2, 3, name);
    const double length = p.size() > 2 ? p[2] : 2 * pi * std::hypot(p[0], p[1]);
    return helix(p[0], p[1], length);
  }
  if (name == "torus") {
    require_count(p, 2, 2, name);
    if (p[0] <= p[1]) {
      throw ParameterError("geometry.catalog_shape",
                           "torus requires A > a (tube would self-intersect)", 0);
    }
    return torus(p[0], p[1]);
  }
  if (name == "sphere") {
    require_count(p, 1, 1, name);
    return sphere(p[0]);
  }
  if (name == "flat_torus4") {
    require_count(p, 1, 1, name);
    return flat_torus4(p[0]);
  }
  if (name == "segment") {
    require_count(p, 1, 1, name);
    return segment(p[0]);
  }
  if (name == "plane") {
    require_count(p, 2, 2, name);
    return plane(p[0], p[1]);
  }
  throw ParameterError("geometry.catalog_shape", "unknown shape '" + name + "'");
}

JetD jets_fd(const Embedding& e, const VectorXd& params, int order) {
  return jets_fd(e, params, order, 0.0);
}

JetD jets_fd(const Embedding& e, const VectorXd& params, int order, double step) {
  if (order < 1 || order > 3) {
    throw ParameterError("geometry.jets_fd", "order must be 1, 2 or 3");
  }
  if (!e.contains(params)) {
    throw ParameterError("geometry.jets_fd", "parameters outside the non-periodic domain");
  }
  const int k = e.intrinsic_dim();
  // per-axis length scale; default steps balance truncation and round-off
  VectorXd scale(k);
  for (int a = 0; a < k; ++a) scale[a] = e.domain()[a].length() / (2 * pi);
  static constexpr double kDefaultStep[4] = {0.0, 1e-3, 4e-3, 1.5e-2};

  auto richardson = [&](const std::array<int, 2>& counts) {
    const int m = counts[0] + counts[1];
    const VectorXd h = scale * (step > 0.0 ? step : kDefaultStep[m]);
    const VectorXd coarse = central_partial(e, params, counts, h);
    const VectorXd fine = central_partial(e, params, counts, 0.5 * h);
    return VectorXd((4.0 * fine - coarse) / 3.0);
  };

  JetD j(e.ambient_dim(), k);
  j.position = e.position(params);
  for (int a = 0; a < k; ++a) {
    std::array<int, 2> c{0, 0};
    ++c[a];
    j.first.col(a) = richardson(c);
    if (order < 2) continue;
    for (int b = 0; b < k; ++b) {
      auto c2 = c;
      ++c2[b];
      j.d2(a, b) = richardson(c2);
      if (order < 3) continue;
      for (int d = 0; d < k; ++d) {
        auto c3 = c2;
        ++c3[d];
        j.d3(a, b, d) = richardson(c3);
      }
    }
  }
  return j;
}

double immersion_ratio(const JetD& jet) {
  Eigen::JacobiSVD<MatrixXd> svd(jet.first);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

Embedding load_sampled_curve(const std::filesystem::path& path) {
  static const std::string where = "geometry.load_sampled_curve";
  std::ifstream in(path);
  if (!in) throw Error(where, "cannot open " + path.string());

  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
  };

  std::string line;
  if (!std::getline(in, line)) throw Error(where, "malformed CSV: empty file");
  const auto header = split(line);
  const std::vector<std::string> h3{"s", "x", "y", "z"};
  const std::vector<std::string> h4{"s", "x", "y", "z", "w"};
  if (header != h3 && header != h4) {
    throw Error(where, "malformed CSV: header must be s,x,y,z or s,x,y,z,w");
  }
  const int ambient = static_cast<int>(header.size()) - 1;

  std::vector<double> s;
  std::vector<VectorXd> pts;
  Index row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(where, "malformed CSV: row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " columns");
    }
    VectorXd y(ambient);
    double sv = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[c].size() || cells[c].empty() || !std::isfinite(v)) {
        throw Error(where, "malformed CSV: bad number at row " + std::to_string(row));
      }
      if (c == 0) sv = v; else y[static_cast<Index>(c) - 1] = v;
    }
    s.push_back(sv);
    pts.push_back(y);
  }
  if (s.size() < 16) throw Error(where, "too few samples (need at least 16 rows)");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw Error(where, "parameter not increasing at row " +
                                                   std::to_string(i + 2));
  }

  const bool closed = (pts.front() - pts.back()).norm() <= 1e-8;
  const double s_end = s.back();
  if (closed) {
    s.pop_back();
    pts.pop_back();
  }
  const Index n = static_cast<Index>(pts.size());
  MatrixXd values(n, ambient);
  for (Index i = 0; i < n; ++i) values.row(i) = pts[i].transpose();

  std::shared_ptr<const detail::CurveSpline> spline;
  const Axis axis{s.front(), s_end, closed};
  if (closed) {
    const double period = s_end - s.front();
    const double h = period / static_cast<double>(n);
    bool uniform = true;
    for (Index i = 0; i < n; ++i) {
      const double next = i + 1 < n ? s[i + 1] : s_end;
      if (std::abs(next - s[i] - h) > 1e-9 * h) uniform = false;
    }
    // Uniform closed samples get the quintic: a cubic's second derivative
    // is only O(h^2) at the knots, too coarse for curvature at ~256 samples.
    spline = uniform ? detail::make_periodic_quintic(s.front(), h, values)
                     : detail::make_cubic_spline(s, values, true, period);
  } else {
    spline = detail::make_cubic_spline(s, values, false, 0.0);
  }
  auto jet = [spline, ambient](const VectorXd& p) {
    const MatrixXd d = spline->eval(p[0]);
    JetD j(ambient, 1);
    j.position = d.row(0).transpose();
    j.first.col(0) = d.row(1).transpose();
    j.d2(0, 0) = d.row(2).transpose();
    j.d3(0, 0, 0) = d.row(3).transpose();
    return j;
  };
  return Embedding("sampled:" + path.filename().string(), ambient, {axis}, jet);
}

}  // namespace tubeq
