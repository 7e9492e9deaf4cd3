#include "membrane/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "membrane/errors.hpp"
#include "membrane/spline.hpp"

namespace membrane {

namespace {

double polyline_length(const std::vector<double>& x, const std::vector<double>& y) {
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) L += std::hypot(x[i + 1] - x[i], y[i + 1] - y[i]);
  return L;
}

std::vector<double> cumulative_chord(const Curve& c) {
  std::vector<double> s(c.size(), 0.0);
  for (std::size_t i = 1; i < c.size(); ++i) s[i] = s[i - 1] + c.chord(i - 1);
  return s;
}

// Drops coincident samples so the chord parameter is strictly increasing.
void strictly_increasing(std::vector<double>& s, std::vector<double>& x, std::vector<double>& y,
                         std::vector<double>& f) {
  std::size_t out = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[out - 1]) {
      s[out] = s[i];
      x[out] = x[i];
      y[out] = y[i];
      f[out] = f[i];
      ++out;
    } else if (i + 1 == s.size()) {
      x[out - 1] = x[i];
      y[out - 1] = y[i];
      f[out - 1] = f[i];
    }
  }
  s.resize(out);
  x.resize(out);
  y.resize(out);
  f.resize(out);
}

}  // namespace

Curve build_curve(std::vector<double> x, std::vector<double> y, double param_length,
                  const GeometryOptions& opts) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "x and y differ in length");
  if (x.size() < 2) fail(ErrorCode::DegenerateLength, "a curve needs at least two points");
  if (!(param_length > 0.0)) fail(ErrorCode::InvalidArgument, "parameter length must be positive");
  const double L = polyline_length(x, y);
  if (!(L > 0.0)) fail(ErrorCode::DegenerateLength, "curve has zero length");
  if (x.size() < 3) fail(ErrorCode::InvalidArgument, "a curve needs at least three points");
  const double tol = opts.monotone_tol * std::max(1.0, L);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] >= 0.0)) fail(ErrorCode::NegativeY, "y < 0 at node " + std::to_string(i));
    if (i > 0 && x[i] < x[i - 1] - tol) fail(ErrorCode::NonMonotoneX, "x decreases at node " + std::to_string(i));
  }
  Curve c;
  c.x = std::move(x);
  c.y = std::move(y);
  c.param_length = param_length;
  c.speed = L / param_length;
  return c;
}

Curve build_curve(const std::vector<Point>& points, double param_length, const GeometryOptions& opts) {
  std::vector<double> x, y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const auto& p : points) {
    x.push_back(p.x);
    y.push_back(p.y);
  }
  return build_curve(std::move(x), std::move(y), param_length, opts);
}

double speed_deviation(const Curve& c) {
  double worst = 0.0;
  const double dt = c.dt();
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    worst = std::max(worst, std::abs(c.chord(i) / dt - c.speed) / c.speed);
  return worst;
}

bool has_near_constant_speed(const Curve& c, double tol) { return speed_deviation(c) <= tol; }

ResampledCurve reparametrize_with_field(const Curve& c, const std::vector<double>& field,
                                        std::size_t nodes) {
  if (field.size() != c.size()) fail(ErrorCode::InvalidArgument, "field size differs from curve");
  const std::size_t n = nodes == 0 ? c.size() : nodes;
  if (n < 3) fail(ErrorCode::InvalidArgument, "at least three nodes required");

  std::vector<double> s = cumulative_chord(c);
  std::vector<double> xs = c.x, ys = c.y, fs = field;
  strictly_increasing(s, xs, ys, fs);
  const CubicSpline sx(s, xs), sy(s, ys), sf(s, fs);
  const double total = s.back();

  // Walks along the spline placing nodes at chord distance h; returns the
  // signed miss of the last node.
  std::vector<double> placed(n, 0.0);
  const auto place = [&](double h) {
    placed[0] = 0.0;
    double px = xs.front(), py = ys.front();
    for (std::size_t k = 1; k < n; ++k) {
      double lo = placed[k - 1], hi = std::min(total, lo + 2.0 * h);
      const auto dist = [&](double t) { return std::hypot(sx(t) - px, sy(t) - py) - h; };
      if (dist(hi) < 0.0) {
        hi = total;
        if (dist(hi) < 0.0) {
          for (std::size_t j = k; j < n; ++j) placed[j] = total;
          return -(static_cast<double>(n - k) - 1.0) * h - std::hypot(xs.back() - px, ys.back() - py);
        }
      }
      for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, total); ++it) {
        const double mid = 0.5 * (lo + hi);
        (dist(mid) < 0.0 ? lo : hi) = mid;
      }
      placed[k] = 0.5 * (lo + hi);
      px = sx(placed[k]);
      py = sy(placed[k]);
    }
    return total - placed[n - 1];
  };

  double h0 = total / static_cast<double>(n - 1);
  double h1 = h0 * (1.0 - 1e-6);
  double m0 = place(h0), m1 = place(h1);
  for (int it = 0; it < 60 && std::abs(m1) > 1e-14 * total; ++it) {
    if (m1 == m0) break;
    const double h2 = h1 - m1 * (h1 - h0) / (m1 - m0);
    h0 = h1;
    m0 = m1;
    h1 = h2;
    m1 = place(h1);
  }
  if (std::abs(m1) > 1e-14 * total) place(h1);

  ResampledCurve out;
  std::vector<double> x(n), y(n), f(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = sx(placed[k]);
    y[k] = std::max(0.0, sy(placed[k]));
    f[k] = sf(placed[k]);
  }
  x.front() = c.x.front();
  y.front() = c.y.front();
  f.front() = field.front();
  x.back() = c.x.back();
  y.back() = c.y.back();
  f.back() = field.back();
  for (std::size_t k = 1; k < n; ++k) x[k] = std::max(x[k], x[k - 1]);
  GeometryOptions loose;
  loose.monotone_tol = 1e-9;
  out.curve = build_curve(std::move(x), std::move(y), c.param_length, loose);
  out.field = std::move(f);
  return out;
}

Curve reparametrize_constant_speed(const Curve& c, std::size_t nodes) {
  return reparametrize_with_field(c, std::vector<double>(c.size(), 0.0), nodes).curve;
}

AngleField angle_function(const Curve& c) {
  const std::size_t n = c.size();
  AngleField a;
  a.phi.resize(n);
  const double dt = c.dt();
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = stencil::at(i, n);
    double xp = 0.0, yp = 0.0;
    for (int k = 0; k < s.count; ++k) {
      xp += s.d1[k] * c.x[s.first + k];
      yp += s.d1[k] * c.y[s.first + k];
    }
    a.phi[i] = std::atan2(yp / dt, xp / dt);
    if (i > 0) {
      while (a.phi[i] - a.phi[i - 1] > std::numbers::pi) a.phi[i] -= 2.0 * std::numbers::pi;
      while (a.phi[i] - a.phi[i - 1] < -std::numbers::pi) a.phi[i] += 2.0 * std::numbers::pi;
    }
  }
  return a;
}

void check_pole_tangents(const Curve& c, const GeometryOptions& opts) {
  const std::size_t n = c.size();
  for (std::size_t i : {std::size_t{0}, n - 1}) {
    if (c.y[i] != 0.0) continue;
    const auto s = stencil::at(i, n);
    double xp = 0.0, yp = 0.0;
    for (int k = 0; k < s.count; ++k) {
      xp += s.d1[k] * c.x[s.first + k];
      yp += s.d1[k] * c.y[s.first + k];
    }
    const double sp = std::hypot(xp, yp);
    if (sp > 0.0 && std::abs(xp) / sp > opts.pole_tangent_tol)
      fail(ErrorCode::PoleTangentNotPerpendicular,
           "tangent at axis endpoint " + std::to_string(i) + " is not perpendicular to the axis");
  }
}

CurvatureField curvatures(const Curve& c, const GeometryOptions& opts) {
  check_pole_tangents(c, opts);
  const std::size_t n = c.size();
  const double dt = c.dt();
  const double pole_height = opts.pole_tol * c.speed * dt;
  CurvatureField f;
  f.kappa1.resize(n);
  f.kappa2.resize(n);
  f.H.resize(n);
  f.K.resize(n);
  f.B2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = stencil::at(i, n);
    const bool pole = c.y[i] <= pole_height;
    const auto g = stencil::local_geometry<double>(&c.x[s.first], &c.y[s.first], s, dt, c.y[i], pole);
    f.kappa1[i] = g.kappa1;
    f.kappa2[i] = g.kappa2;
    f.H[i] = g.kappa1 + g.kappa2;
    f.K[i] = g.kappa1 * g.kappa2;
    f.B2[i] = f.H[i] * f.H[i] - 2.0 * f.K[i];
  }
  return f;
}

MeasureWeights measures(const Curve& c) {
  const std::size_t n = c.size();
  MeasureWeights m;
  m.w.assign(n, 0.0);
  m.wL.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double l = c.chord(k);
    m.length += l;
    m.wL[k] += 0.5 * l;
    m.wL[k + 1] += 0.5 * l;
    m.w[k] += std::numbers::pi * c.y[k] * l;
    m.w[k + 1] += std::numbers::pi * c.y[k + 1] * l;
    if (c.y[k] == 0.0 && c.y[k + 1] == 0.0) m.axis_length += l;
    const double dx = c.x[k + 1] - c.x[k];
    m.volume += std::numbers::pi * dx *
                (c.y[k] * c.y[k] + c.y[k] * c.y[k + 1] + c.y[k + 1] * c.y[k + 1]) / 3.0;
  }
  for (double w : m.w) m.area += w;
  return m;
}

namespace stencil {

Stencil at(std::size_t i, std::size_t n) {
  Stencil s;
  if (i > 0 && i + 1 < n) {
    s.first = static_cast<int>(i) - 1;
    s.count = 3;
    s.d1 = {-0.5, 0.0, 0.5, 0.0};
    s.d2 = {1.0, -2.0, 1.0, 0.0};
    return s;
  }
  const bool left = i == 0;
  if (n >= 4) {
    s.count = 4;
    if (left) {
      s.first = 0;
      s.d1 = {-1.5, 2.0, -0.5, 0.0};
      s.d2 = {2.0, -5.0, 4.0, -1.0};
    } else {
      s.first = static_cast<int>(n) - 4;
      s.d1 = {0.0, 0.5, -2.0, 1.5};
      s.d2 = {-1.0, 4.0, -5.0, 2.0};
    }
  } else {
    s.count = 3;
    if (left) {
      s.first = 0;
      s.d1 = {-1.5, 2.0, -0.5, 0.0};
    } else {
      s.first = static_cast<int>(n) - 3;
      s.d1 = {0.5, -2.0, 1.5, 0.0};
    }
    s.d2 = {1.0, -2.0, 1.0, 0.0};
  }
  return s;
}

}  // namespace stencil

}  // namespace membrane
