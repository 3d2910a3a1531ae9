#include "spline.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tubeq::detail {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

MatrixXd solve_sparse(const Eigen::SparseMatrix<double>& a, const MatrixXd& rhs) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("spline system is singular");
  return lu.solve(rhs);
}

class CubicSpline final : public CurveSpline {
 public:
  CubicSpline(std::vector<double> knots, MatrixXd values, bool periodic, double period)
      : knots_(std::move(knots)), values_(std::move(values)), periodic_(periodic),
        period_(period) {
    const Index n = values_.rows();
    if (periodic_) {
      // close the loop so interval search is uniform
      knots_.push_back(knots_.front() + period_);
      MatrixXd closed(n + 1, values_.cols());
      closed << values_, values_.row(0);
      values_ = std::move(closed);
    }
    const Index segments = static_cast<Index>(knots_.size()) - 1;
    std::vector<double> h(segments);
    for (Index i = 0; i < segments; ++i) h[i] = knots_[i + 1] - knots_[i];

    second_ = MatrixXd::Zero(segments + 1, values_.cols());
    std::vector<Eigen::Triplet<double>> trip;
    if (periodic_) {
      // unknowns M_0..M_{n-1}, M_n == M_0
      MatrixXd rhs(n, values_.cols());
      for (Index i = 0; i < n; ++i) {
        const Index im = (i + n - 1) % n;
        const double hm = h[im];
        const double hp = h[i];
        trip.emplace_back(i, im, hm);
        trip.emplace_back(i, i, 2.0 * (hm + hp));
        trip.emplace_back(i, (i + 1) % n, hp);
        rhs.row(i) = 6.0 * ((values_.row(i + 1) - values_.row(i)) / hp -
                            (values_.row(i) - values_.row(im)) / hm);
      }
      Eigen::SparseMatrix<double> a(n, n);
      a.setFromTriplets(trip.begin(), trip.end());
      const MatrixXd m = solve_sparse(a, rhs);
      second_.topRows(n) = m;
      second_.row(n) = m.row(0);
    } else {
      const Index inner = segments - 1;
      if (inner > 0) {
        MatrixXd rhs(inner, values_.cols());
        for (Index r = 0; r < inner; ++r) {
          const Index i = r + 1;
          if (r > 0) trip.emplace_back(r, r - 1, h[i - 1]);
          trip.emplace_back(r, r, 2.0 * (h[i - 1] + h[i]));
          if (r + 1 < inner) trip.emplace_back(r, r + 1, h[i]);
          rhs.row(r) = 6.0 * ((values_.row(i + 1) - values_.row(i)) / h[i] -
                              (values_.row(i) - values_.row(i - 1)) / h[i - 1]);
        }
        Eigen::SparseMatrix<double> a(inner, inner);
        a.setFromTriplets(trip.begin(), trip.end());
        second_.middleRows(1, inner) = solve_sparse(a, rhs);
      }
    }
  }

  MatrixXd eval(double t) const override {
    if (periodic_) {
      t = knots_.front() + std::fmod(t - knots_.front(), period_);
      if (t < knots_.front()) t += period_;
    }
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    Index i = std::clamp<Index>(static_cast<Index>(it - knots_.begin()) - 1, 0,
                                static_cast<Index>(knots_.size()) - 2);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - t) / h;
    const double b = (t - knots_[i]) / h;
    const auto y0 = values_.row(i);
    const auto y1 = values_.row(i + 1);
    const auto m0 = second_.row(i);
    const auto m1 = second_.row(i + 1);

    MatrixXd out(4, values_.cols());
    out.row(0) = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (h * h / 6.0);
    out.row(1) = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 +
                 (3.0 * b * b - 1.0) / 6.0 * h * m1;
    out.row(2) = a * m0 + b * m1;
    out.row(3) = (m1 - m0) / h;
    return out;
  }

 private:
  std::vector<double> knots_;
  MatrixXd values_;
  MatrixXd second_;
  bool periodic_;
  double period_;
};

// Centred cardinal quintic B-spline (support [-3, 3]) and its derivatives:
// B(x) = (1/5!) sum_k (-1)^k C(6,k) (x + 3 - k)_+^5.
double quintic_basis(double x, int derivative) {
  static constexpr double binom[7] = {1, 6, 15, 20, 15, 6, 1};
  static constexpr double falling[4] = {1.0, 5.0, 20.0, 60.0};  // 5!/(5-d)!
  double sum = 0.0;
  for (int k = 0; k <= 6; ++k) {
    const double y = x + 3.0 - k;
    if (y <= 0.0) continue;
    sum += ((k % 2) ? -1.0 : 1.0) * binom[k] * falling[derivative] * std::pow(y, 5 - derivative);
  }
  return sum / 120.0;
}

class PeriodicQuintic final : public CurveSpline {
 public:
  PeriodicQuintic(double s0, double h, const MatrixXd& values) : s0_(s0), h_(h) {
    const Index n = values.rows();
    std::vector<Eigen::Triplet<double>> trip;
    for (Index i = 0; i < n; ++i) {
      for (int off = -2; off <= 2; ++off) {
        trip.emplace_back(i, ((i + off) % n + n) % n, quintic_basis(off, 0));
      }
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    coeffs_ = solve_sparse(a, values);
  }

  MatrixXd eval(double t) const override {
    const Index n = coeffs_.rows();
    const double u = (t - s0_) / h_;
    const Index base = static_cast<Index>(std::floor(u));
    MatrixXd out = MatrixXd::Zero(4, coeffs_.cols());
    for (Index j = base - 2; j <= base + 3; ++j) {
      const auto c = coeffs_.row(((j % n) + n) % n);
      for (int d = 0; d <= 3; ++d) {
        out.row(d) += quintic_basis(u - static_cast<double>(j), d) * std::pow(h_, -d) * c;
      }
    }
    return out;
  }

 private:
  double s0_;
  double h_;
  MatrixXd coeffs_;
};

}  // namespace

std::unique_ptr<CurveSpline> make_cubic_spline(std::vector<double> knots, MatrixXd values,
                                               bool periodic, double period) {
  return std::make_unique<CubicSpline>(std::move(knots), std::move(values), periodic, period);
}

std::unique_ptr<CurveSpline> make_periodic_quintic(double s0, double h, MatrixXd values) {
  return std::make_unique<PeriodicQuintic>(s0, h, values);
}

}  // namespace tubeq::detail
