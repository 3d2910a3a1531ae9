#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

namespace tubeq::detail {

// Vector-valued interpolating spline of one parameter. eval() fills row d
// (d = 0..3) with the d-th derivative at t.
class CurveSpline {
 public:
  virtual ~CurveSpline() = default;
  virtual Eigen::MatrixXd eval(double t) const = 0;
};

// Cubic spline through (knots[i], values.row(i)). Periodic splines take the
// period explicitly and expect no duplicated closing row; open splines use
// natural end conditions.
std::unique_ptr<CurveSpline> make_cubic_spline(std::vector<double> knots,
                                               Eigen::MatrixXd values, bool periodic,
                                               double period);

// Periodic quintic B-spline on uniform knots s0 + i*h, i < values.rows().
std::unique_ptr<CurveSpline> make_periodic_quintic(double s0, double h,
                                                   Eigen::MatrixXd values);

}  // namespace tubeq::detail
