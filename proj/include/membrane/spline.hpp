#pragma once

#include <vector>

namespace membrane {

// Cubic spline through (t_i, v_i) with strictly increasing knots.
// Not-a-knot end conditions for four or more knots, natural for three,
// linear for two.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> t, std::vector<double> v);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  double front() const { return t_.front(); }
  double back() const { return t_.back(); }

 private:
  std::size_t interval(double t) const;

  std::vector<double> t_, v_, m_;  // m_ holds second derivatives at knots
};

// Piecewise cubic Hermite interpolant from values and slopes.
class HermiteSpline {
 public:
  HermiteSpline() = default;
  HermiteSpline(std::vector<double> t, std::vector<double> v, std::vector<double> dv);

  double operator()(double t) const;
  double derivative(double t) const;

 private:
  std::vector<double> t_, v_, dv_;
};

}  // namespace membrane
