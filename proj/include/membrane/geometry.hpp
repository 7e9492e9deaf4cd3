#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "membrane/dual.hpp"

namespace membrane {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Generating curve sampled on a uniform parameter grid t_i = i * param_length / (n - 1).
struct Curve {
  std::vector<double> x;
  std::vector<double> y;
  double param_length = 1.0;
  double speed = 1.0;

  std::size_t size() const { return x.size(); }
  double dt() const { return param_length / static_cast<double>(x.size() - 1); }
  double chord(std::size_t c) const { return std::hypot(x[c + 1] - x[c], y[c + 1] - y[c]); }
};

struct GeometryOptions {
  // kappa2 is replaced by kappa1 where y <= pole_tol * speed * dt.
  double pole_tol = 0.0;
  double speed_tol = 1e-3;
  double pole_tangent_tol = 0.2;
  double monotone_tol = 1e-12;
};

struct AngleField {
  std::vector<double> phi;
};

struct CurvatureField {
  std::vector<double> kappa1, kappa2, H, K, B2;
};

struct MeasureWeights {
  std::vector<double> w;   // area weights, sum = polyline surface area
  std::vector<double> wL;  // length weights
  double length = 0.0;
  double area = 0.0;
  double volume = 0.0;
  double axis_length = 0.0;  // cells lying on the axis
};

Curve build_curve(std::vector<double> x, std::vector<double> y, double param_length,
                  const GeometryOptions& opts = {});
Curve build_curve(const std::vector<Point>& points, double param_length,
                  const GeometryOptions& opts = {});

// Largest relative deviation of the local speed from the nominal speed.
double speed_deviation(const Curve& c);
bool has_near_constant_speed(const Curve& c, double tol = 1e-3);

Curve reparametrize_constant_speed(const Curve& c, std::size_t nodes = 0);

struct ResampledCurve {
  Curve curve;
  std::vector<double> field;
};

// Redistributes nodes to equal chords and carries a nodal field along.
ResampledCurve reparametrize_with_field(const Curve& c, const std::vector<double>& field,
                                        std::size_t nodes = 0);

AngleField angle_function(const Curve& c);
CurvatureField curvatures(const Curve& c, const GeometryOptions& opts = {});
MeasureWeights measures(const Curve& c);

// Throws PoleTangentNotPerpendicular when an axis endpoint meets the axis obliquely.
void check_pole_tangents(const Curve& c, const GeometryOptions& opts = {});

namespace stencil {

// Finite difference stencil for node i of an n-node grid, coefficients scaled by 1/dt and 1/dt^2.
struct Stencil {
  int first = 0;
  int count = 3;
  std::array<double, 4> d1{};
  std::array<double, 4> d2{};
};

Stencil at(std::size_t i, std::size_t n);

template <class T>
struct Local {
  T xp, yp, xpp, ypp, speed, kappa1, kappa2;
};

// xs/ys hold the values at nodes first..first+count-1.
template <class T>
Local<T> local_geometry(const T* xs, const T* ys, const Stencil& s, double dt, const T& y_node,
                        bool pole) {
  T xp(0.0), yp(0.0), xpp(0.0), ypp(0.0);
  for (int k = 0; k < s.count; ++k) {
    xp = xp + s.d1[k] * xs[k];
    yp = yp + s.d1[k] * ys[k];
    xpp = xpp + s.d2[k] * xs[k];
    ypp = ypp + s.d2[k] * ys[k];
  }
  const double inv = 1.0 / dt, inv2 = inv * inv;
  xp = xp * inv;
  yp = yp * inv;
  xpp = xpp * inv2;
  ypp = ypp * inv2;
  using std::sqrt;
  const T sp2 = xp * xp + yp * yp;
  const T sp = sqrt(sp2);
  const T k1 = (xpp * yp - ypp * xp) / (sp2 * sp);
  const T k2 = pole ? k1 : xp / (y_node * sp);
  return {xp, yp, xpp, ypp, sp, k1, k2};
}

template <class T>
T chord(const T& xa, const T& ya, const T& xb, const T& yb) {
  using std::sqrt;
  const T dx = xb - xa, dy = yb - ya;
  return sqrt(dx * dx + dy * dy);
}

}  // namespace stencil

}  // namespace membrane
