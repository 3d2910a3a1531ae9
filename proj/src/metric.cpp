#include "tubeq/metric.hpp"

#include "tubeq/error.hpp"

namespace tubeq {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MetricField::MetricField(int dim, ValueFn value, JetFn jet)
    : dim_(dim), value_(std::move(value)), jet_(std::move(jet)) {
  if (dim_ < 1 || dim_ > 3) throw ParameterError("operators.MetricField", "dimension must be 1-3");
}

MetricField MetricField::from_embedding(const Embedding& embedding) {
  const int k = embedding.intrinsic_dim();
  auto value = [embedding](const VectorXd& p) {
    const MatrixXd j = embedding.jet(p).first;
    return MatrixXd(j.transpose() * j);
  };
  auto jet = [embedding, k](const VectorXd& p) {
    const JetD y = embedding.jet(p);
    MetricJet m;
    m.g = y.first.transpose() * y.first;
    for (int c = 0; c < k; ++c) {
      MatrixXd d(k, k);
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          d(a, b) = y.d2(c, a).dot(y.first.col(b)) + y.first.col(a).dot(y.d2(c, b));
        }
      }
      m.dg.push_back(d);
    }
    for (int c = 0; c < k; ++c) {
      for (int e = 0; e < k; ++e) {
        MatrixXd dd(k, k);
        for (int a = 0; a < k; ++a) {
          for (int b = 0; b < k; ++b) {
            dd(a, b) = y.d3(c, e, a).dot(y.first.col(b)) + y.d2(c, a).dot(y.d2(e, b)) +
                       y.d2(e, a).dot(y.d2(c, b)) + y.first.col(a).dot(y.d3(c, e, b));
          }
        }
        m.ddg.push_back(dd);
      }
    }
    return m;
  };
  return MetricField(k, value, jet);
}

MetricField MetricField::from_function(int dim, ValueFn value, double step) {
  auto jet = [dim, value, step](const VectorXd& p) {
    auto shifted = [&](int a, double da, int b, double db) {
      VectorXd q = p;
      q[a] += da;
      q[b] += db;
      return value(q);
    };
    auto first = [&](int c, double h) {
      return MatrixXd((shifted(c, h, c, 0.0) - shifted(c, -h, c, 0.0)) / (2 * h));
    };
    auto second = [&](int c, int e, double h) {
      if (c == e) {
        return MatrixXd((shifted(c, h, c, 0.0) - 2 * value(p) + shifted(c, -h, c, 0.0)) / (h * h));
      }
      return MatrixXd((shifted(c, h, e, h) - shifted(c, h, e, -h) - shifted(c, -h, e, h) +
                       shifted(c, -h, e, -h)) /
                      (4 * h * h));
    };
    MetricJet m;
    m.g = value(p);
    for (int c = 0; c < dim; ++c) {
      m.dg.push_back((4.0 * first(c, 0.5 * step) - first(c, step)) / 3.0);
    }
    const double h2 = 4.0 * step;
    for (int c = 0; c < dim; ++c) {
      for (int e = 0; e < dim; ++e) {
        m.ddg.push_back((4.0 * second(c, e, 0.5 * h2) - second(c, e, h2)) / 3.0);
      }
    }
    return m;
  };
  return MetricField(dim, value, jet);
}

}  // namespace tubeq
