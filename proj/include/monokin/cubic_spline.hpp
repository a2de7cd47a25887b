#pragma once

#include <vector>

namespace monokin {

// Natural cubic spline through (x, y) knots with strictly increasing x.
// C2 inside the knot range, linear extrapolation outside (keeps C1).
class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double value(double x) const;
    double derivative(double x) const;

    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }
    bool empty() const { return x_.empty(); }

  private:
    std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
    int interval(double x) const;
};

}  // namespace monokin
