#include "membrane/shapes.hpp"

#include <cmath>
#include <array>
#include <numbers>
#include <random>

#include "membrane/errors.hpp"

namespace membrane::shapes {

namespace {
constexpr double kPi = std::numbers::pi;
}

Curve sphere(std::size_t nodes, double radius, double cx) {
  if (nodes < 3 || !(radius > 0.0)) fail(ErrorCode::InvalidArgument, "sphere needs 3 nodes and radius > 0");
  std::vector<double> x(nodes), y(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double t = kPi * static_cast<double>(i) / static_cast<double>(nodes - 1);
    x[i] = cx - radius * std::cos(t);
    y[i] = radius * std::sin(t);
  }
  y.front() = 0.0;
  y.back() = 0.0;
  return build_curve(std::move(x), std::move(y), kPi);
}

Curve capped_cylinder(std::size_t nodes) {
  if (nodes < 3) fail(ErrorCode::InvalidArgument, "capped cylinder needs at least 3 nodes");
  const double r = 0.5, quarter = kPi * r / 2.0, straight = 3.0;
  const double total = 2.0 * quarter + straight;
  std::vector<double> x(nodes), y(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double s = total * static_cast<double>(i) / static_cast<double>(nodes - 1);
    if (s <= quarter) {
      const double a = s / r;
      x[i] = -1.5 - r * std::cos(a);
      y[i] = r * std::sin(a);
    } else if (s <= quarter + straight) {
      x[i] = -1.5 + (s - quarter);
      y[i] = r;
    } else {
      const double a = (s - quarter - straight) / r;
      x[i] = 1.5 + r * std::sin(a);
      y[i] = r * std::cos(a);
    }
  }
  y.front() = 0.0;
  y.back() = 0.0;
  return build_curve(std::move(x), std::move(y), total);
}

PhaseField capped_cylinder_phase(const Curve& c) {
  PhaseField u(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double x = c.x[i];
    u[i] = x <= -1.25 ? -1.0 : (x >= 0.25 ? 1.0 : 4.0 * x / 3.0 + 2.0 / 3.0);
  }
  return u;
}

Curve cylinder(std::size_t nodes, double radius, double length, double x0) {
  std::vector<double> x(nodes), y(nodes, radius);
  for (std::size_t i = 0; i < nodes; ++i)
    x[i] = x0 + length * static_cast<double>(i) / static_cast<double>(nodes - 1);
  return build_curve(std::move(x), std::move(y), length);
}

}  // namespace membrane::shapes

namespace membrane::shapes {

Segment arc(double cx, double radius, double t0, double t1, std::size_t samples, int phase) {
  Segment s;
  s.phase = phase;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(samples - 1);
    s.x.push_back(cx - radius * std::cos(t));
    s.y.push_back(radius * std::sin(t));
  }
  if (t0 == 0.0) s.y.front() = 0.0;
  if (t1 == kPi) s.y.back() = 0.0;
  return s;
}

LimitMembrane sphere_with_interface(double radius, std::size_t samples) {
  LimitMembrane mem;
  mem.segments.push_back(arc(0.0, radius, 0.0, kPi / 2.0, samples, -1));
  mem.segments.push_back(arc(0.0, radius, kPi / 2.0, kPi, samples, 1));
  mem.segments[1].x.front() = mem.segments[0].x.back();
  mem.segments[1].y.front() = mem.segments[0].y.back();
  Kink k;
  k.segment = 0;
  k.position = kPi * radius / 2.0;
  k.height = radius;
  k.jump_angle = 0.0;
  k.proper_interface = true;
  mem.kinks.push_back(k);
  return mem;
}

LimitMembrane kinked_spheres(double jump_angle, std::size_t samples) {
  const double half = jump_angle / 2.0;
  const double R = 1.0 / std::sqrt(1.0 + std::sin(half));
  const double c = R * std::sin(half);
  // The junction sits at polar angle pi/2 + half on the left sphere.
  const double tj = kPi / 2.0 + half;
  LimitMembrane mem;
  mem.segments.push_back(arc(-c, R, 0.0, tj, samples, -1));
  mem.segments.push_back(arc(c, R, kPi - tj, kPi, samples, 1));
  mem.segments[0].x.back() = 0.0;
  mem.segments[1].x.front() = 0.0;
  mem.segments[1].y.front() = mem.segments[0].y.back();
  Kink k;
  k.segment = 0;
  k.position = R * tj;
  k.height = mem.segments[0].y.back();
  k.jump_angle = jump_angle;
  k.proper_interface = true;
  mem.kinks.push_back(k);
  return mem;
}

LimitMembrane two_lines(double jump_angle, double height, double half_length, std::size_t samples,
                        bool proper_interface, int phase) {
  const double a = jump_angle / 2.0;
  LimitMembrane mem;
  Segment left, right;
  left.phase = proper_interface ? -phase : phase;
  right.phase = phase;
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = half_length * static_cast<double>(i) / static_cast<double>(samples - 1);
    left.x.push_back(-(half_length - s) * std::cos(a));
    left.y.push_back(height + (half_length - s) * std::sin(a));
    right.x.push_back(s * std::cos(a));
    right.y.push_back(height + s * std::sin(a));
  }
  left.x.back() = 0.0;
  left.y.back() = height;
  mem.segments = {left, right};
  Kink k;
  k.segment = 0;
  k.position = half_length;
  k.height = height;
  k.jump_angle = jump_angle;
  k.proper_interface = proper_interface;
  mem.kinks.push_back(k);
  return mem;
}

}  // namespace membrane::shapes

namespace membrane::shapes {

namespace {

struct Piece {
  bool arc = false;
  double ax = 0.0, ay = 0.0;  // line start or arc centre
  double bx = 0.0, by = 0.0;  // line end
  double radius = 0.0, a0 = 0.0, a1 = 0.0;

  double length() const { return arc ? radius * std::abs(a1 - a0) : std::hypot(bx - ax, by - ay); }
  Point at(double s) const {
    const double t = s / length();
    if (!arc) return {ax + t * (bx - ax), ay + t * (by - ay)};
    const double a = a0 + t * (a1 - a0);
    return {ax + radius * std::cos(a), ay + radius * std::sin(a)};
  }
};

Piece line(Point a, Point b) { return {false, a.x, a.y, b.x, b.y, 0.0, 0.0, 0.0}; }
Piece circle(Point c, double r, double a0, double a1) { return {true, c.x, c.y, 0.0, 0.0, r, a0, a1}; }

struct Sampled {
  std::vector<double> x, y, s;
  double total = 0.0;
};

Sampled sample_path(const std::vector<Piece>& path, std::size_t nodes) {
  Sampled out;
  for (const auto& p : path) out.total += p.length();
  std::size_t piece = 0;
  double start = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double s = out.total * static_cast<double>(i) / static_cast<double>(nodes - 1);
    while (piece + 1 < path.size() && s > start + path[piece].length()) start += path[piece++].length();
    const Point q = path[piece].at(std::min(s - start, path[piece].length()));
    out.x.push_back(q.x);
    out.y.push_back(q.y);
    out.s.push_back(s);
  }
  out.y.front() = 0.0;
  out.y.back() = 0.0;
  return out;
}

// Replaces the corners of a polyline by tangent arcs of radius r.
std::vector<Piece> rounded(const std::vector<Point>& v, double r) {
  std::vector<Piece> out;
  Point from = v.front();
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const double d1x = v[i].x - v[i - 1].x, d1y = v[i].y - v[i - 1].y;
    const double d2x = v[i + 1].x - v[i].x, d2y = v[i + 1].y - v[i].y;
    const double l1 = std::hypot(d1x, d1y), l2 = std::hypot(d2x, d2y);
    const double turn = std::atan2(d1x * d2y - d1y * d2x, d1x * d2x + d1y * d2y);
    if (std::abs(turn) < 1e-14) continue;
    const double t = r * std::tan(std::abs(turn) / 2.0);
    if (t > 0.5 * std::min(l1, l2) + 1e-15) fail(ErrorCode::InvalidArgument, "corner radius too large for the signal");
    const Point p{v[i].x - t * d1x / l1, v[i].y - t * d1y / l1};
    const double sgn = turn > 0.0 ? 1.0 : -1.0;
    const Point c{p.x - sgn * r * d1y / l1, p.y + sgn * r * d1x / l1};
    const double a0 = std::atan2(p.y - c.y, p.x - c.x);
    out.push_back(line(from, p));
    out.push_back(circle(c, r, a0, a0 + turn));
    from = {v[i].x + t * d2x / l2, v[i].y + t * d2y / l2};
  }
  out.push_back(line(from, v.back()));
  return out;
}

}  // namespace

ShapeWithPhase dumbbell(std::size_t nodes, double l, double h, double eps, double R) {
  if (nodes < 5 || !(l > 0.0) || !(h > 0.0) || !(eps > 0.0) || !(h < R))
    fail(ErrorCode::InvalidArgument, "dumbbell needs l, h, eps > 0 and h < R");
  const double r = h / 2.0, rho = h;
  const double xf = -l / 2.0;
  const double cl = xf - std::sqrt((R + rho) * (R + rho) - (r + rho) * (r + rho));
  const double beta = std::atan2(r + rho, xf - cl);
  const double fa = std::atan2(-(r + rho), cl - xf);
  const std::vector<Piece> path{
      circle({cl, 0.0}, R, kPi, beta),
      circle({xf, r + rho}, rho, fa, -kPi / 2.0),
      line({xf, r}, {-xf, r}),
      circle({-xf, r + rho}, rho, -kPi / 2.0, -kPi - fa),
      circle({-cl, 0.0}, R, kPi - beta, 0.0),
  };
  const auto smp = sample_path(path, nodes);
  const double sphere = path[0].length();
  ShapeWithPhase out;
  out.phase.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double s = smp.s[i];
    if (s < sphere) out.phase[i] = -std::tanh((sphere - s) / eps);
    else if (s > smp.total - sphere) out.phase[i] = std::tanh((s - smp.total + sphere) / eps);
    else out.phase[i] = 0.0;
  }
  out.curve = build_curve(smp.x, smp.y, smp.total);
  return out;
}

SignalShape rectangular_signal(std::size_t nodes, int k, double c, double tilt) {
  if (k < 1 || !(c > 0.0) || nodes < 5 || !(tilt >= 0.0 && tilt < 0.5))
    fail(ErrorCode::InvalidArgument, "rectangular signal needs k >= 1, c > 0, tilt in [0, 1/2)");
  const double kk = static_cast<double>(k);
  const double eps = c / kk, rise = 1.0 / kk, half = 0.5 / (kk * kk);
  const double cap = eps + rise + 0.25, top = 0.5, gap = 0.25;
  const double corner = std::min(eps, 0.25 * (1.0 - tilt) * half);

  const double run = tilt * half;
  std::vector<Point> v{{-gap - top - run, cap}, {-gap - run, cap}, {-gap, eps}};
  for (int j = 0; j < k; ++j) {
    const double x0 = 2.0 * half * j;
    v.push_back({x0, eps});
    v.push_back({x0 + run, eps + rise});
    v.push_back({x0 + half, eps + rise});
    v.push_back({x0 + half + run, eps});
  }
  const double xe = 2.0 * half * kk;
  v.push_back({xe + gap, eps});
  v.push_back({xe + gap + run, cap});
  v.push_back({xe + gap + top + run, cap});

  std::vector<Piece> path{circle({v.front().x, 0.0}, cap, kPi, kPi / 2.0)};
  for (const auto& p : rounded(v, corner)) path.push_back(p);
  path.push_back(circle({v.back().x, 0.0}, cap, kPi / 2.0, 0.0));
  const auto smp = sample_path(path, nodes);

  // Arclength positions of the first and last signal corners on the sharp polyline
  // are shifted by the rounding; locate the window by x instead.
  SignalShape out;
  out.eps = eps;
  out.corner_radius = corner;
  out.window_length = 2.0 * kk * std::hypot(rise, run) + 2.0 * kk * (half - run);
  out.window_first = nodes;
  for (std::size_t i = 0; i < nodes; ++i) {
    if (smp.x[i] >= -1e-15 && smp.x[i] <= xe + 1e-15 && smp.y[i] < cap / 2.0) {
      if (out.window_first == nodes) out.window_first = i;
      out.window_last = i;
    }
  }
  std::vector<double> dist(nodes, 0.0);
  const double s0 = smp.s[out.window_first], s1 = smp.s[out.window_last];
  out.phase.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double d = smp.s[i] < s0 ? s0 - smp.s[i] : (smp.s[i] > s1 ? smp.s[i] - s1 : 0.0);
    out.phase[i] = std::tanh(d / eps);
  }
  out.curve = build_curve(smp.x, smp.y, smp.total);
  return out;
}

}  // namespace membrane::shapes

namespace membrane::shapes {

ShapeWithPhase random_closed(std::size_t nodes, std::uint64_t seed, double amplitude) {
  if (nodes < 5 || !(amplitude >= 0.0) || amplitude > 0.1)
    fail(ErrorCode::InvalidArgument, "random_closed needs 5 nodes and amplitude in [0, 0.1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::array<double, 5> a{};
  for (std::size_t j = 1; j < a.size(); ++j) a[j] = amplitude * d(rng) / static_cast<double>(j * j);
  const double centre = 0.6 * d(rng), width = 0.15 + 0.3 * (d(rng) + 1.0), sign = d(rng) < 0.0 ? -1.0 : 1.0;

  // Oversample in the polar angle, then redistribute to equal chords.
  const std::size_t dense = 8 * nodes;
  std::vector<double> x(dense), y(dense), u(dense);
  for (std::size_t i = 0; i < dense; ++i) {
    const double t = kPi * static_cast<double>(i) / static_cast<double>(dense - 1);
    double r = 1.0;
    for (std::size_t j = 1; j < a.size(); ++j) r += a[j] * std::cos(static_cast<double>(j) * t);
    x[i] = -r * std::cos(t);
    y[i] = r * std::sin(t);
    u[i] = sign * std::tanh((-std::cos(t) - centre) / width);
  }
  y.front() = 0.0;
  y.back() = 0.0;
  auto rs = reparametrize_with_field(build_curve(std::move(x), std::move(y), kPi), u, nodes);
  return {std::move(rs.curve), std::move(rs.field)};
}

}  // namespace membrane::shapes
