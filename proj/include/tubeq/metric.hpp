#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "tubeq/geometry.hpp"

namespace tubeq {

// Metric tensor with first and second parameter derivatives at one point.
// dg[c] = d_c g, ddg[c*k + d] = d_c d_d g.
struct MetricJet {
  Eigen::MatrixXd g;
  std::vector<Eigen::MatrixXd> dg;
  std::vector<Eigen::MatrixXd> ddg;
};

// Smooth positive-definite metric on a parameter domain.
class MetricField {
 public:
  using ValueFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using JetFn = std::function<MetricJet(const Eigen::VectorXd&)>;

  MetricField(int dim, ValueFn value, JetFn jet);

  // Induced metric of an embedding; derivatives from the exact jets.
  static MetricField from_embedding(const Embedding& embedding);
  // Metric given by values only; derivatives by Richardson central
  // differences with the given step.
  static MetricField from_function(int dim, ValueFn value, double step = 1e-3);

  int dim() const { return dim_; }
  Eigen::MatrixXd operator()(const Eigen::VectorXd& p) const { return value_(p); }
  MetricJet jet(const Eigen::VectorXd& p) const { return jet_(p); }

 private:
  int dim_;
  ValueFn value_;
  JetFn jet_;
};

}  // namespace tubeq
