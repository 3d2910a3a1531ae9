#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tubeq/grid.hpp"

namespace tubeq {

// Position and parameter derivatives of an embedding at one point, up to
// third order. Mixed partials are stored for every index tuple so callers
// never have to know the symmetry convention.
template <typename Scalar>
struct Jet {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int intrinsic = 0;
  Vector position;
  Matrix first;                // ambient x intrinsic, column a = d_a Y
  std::vector<Vector> second;  // [a*k + b]
  std::vector<Vector> third;   // [(a*k + b)*k + c]

  Jet() = default;
  Jet(Index ambient, int k)
      : intrinsic(k),
        position(Vector::Zero(ambient)),
        first(Matrix::Zero(ambient, k)),
        second(k * k, Vector::Zero(ambient)),
        third(k * k * k, Vector::Zero(ambient)) {}

  Vector& d2(int a, int b) { return second[a * intrinsic + b]; }
  const Vector& d2(int a, int b) const { return second[a * intrinsic + b]; }
  Vector& d3(int a, int b, int c) { return third[(a * intrinsic + b) * intrinsic + c]; }
  const Vector& d3(int a, int b, int c) const {
    return third[(a * intrinsic + b) * intrinsic + c];
  }
};

using JetD = Jet<double>;

// An immersion of a k-dimensional parameter domain (k = 1 or 2) into E^n.
// Immutable after construction; jet evaluation is a pure function so an
// Embedding can be shared across threads.
class Embedding {
 public:
  using JetFn = std::function<JetD(const Eigen::VectorXd&)>;
  using NormalFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  Embedding(std::string name, int ambient, std::vector<Axis> domain, JetFn jet,
            NormalFn normals = {});

  const std::string& name() const { return name_; }
  int ambient_dim() const { return ambient_; }
  int intrinsic_dim() const { return static_cast<int>(domain_.size()); }
  int codim() const { return ambient_ - intrinsic_dim(); }
  const std::vector<Axis>& domain() const { return domain_; }

  JetD jet(const Eigen::VectorXd& params) const { return jet_(params); }
  Eigen::VectorXd position(const Eigen::VectorXd& params) const { return jet_(params).position; }

  // Catalog shapes may ship an exact orthonormal normal frame (n x codim);
  // everything else gets one built in the frames module.
  bool has_normals() const { return static_cast<bool>(normals_); }
  Eigen::MatrixXd normals(const Eigen::VectorXd& params) const { return normals_(params); }

  // True when `params` lies in the domain (periodic axes always accept).
  bool contains(const Eigen::VectorXd& params) const;

 private:
  std::string name_;
  int ambient_;
  std::vector<Axis> domain_;
  JetFn jet_;
  NormalFn normals_;
};

// Catalog: circle(R), ellipse(a,b), helix(a,b[,L]), torus(A,a), sphere(R),
// flat_torus4(a), plus segment(L) and plane(Lx,Ly) for flat controls.
// All jets are closed form.
Embedding catalog_shape(const std::string& name, const std::vector<double>& params);
std::vector<std::string> catalog_names();

// Jets by central differences of the position map with one Richardson
// step (fourth order in the step). Ignores the analytic jets entirely.
JetD jets_fd(const Embedding& embedding, const Eigen::VectorXd& params, int order);
JetD jets_fd(const Embedding& embedding, const Eigen::VectorXd& params, int order,
             double step);

// Sampled curve from CSV `s,x,y,z` (or `s,x,y,z,w`). A closed curve (first
// and last rows coincide) becomes periodic.
Embedding load_sampled_curve(const std::filesystem::path& path);

// Smallest over largest singular value of the Jacobian; the immersion test
// is immersion_ratio > 1e-10.
double immersion_ratio(const JetD& jet);

}  // namespace tubeq
