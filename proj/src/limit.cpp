#include "membrane/limit.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "membrane/errors.hpp"
#include "membrane/spline.hpp"

namespace membrane {

namespace {

constexpr double kPi = std::numbers::pi;

double mollifier(double tau) { return std::abs(tau) < 1.0 ? std::exp(-1.0 / (1.0 - tau * tau)) : 0.0; }

struct BumpTable {
  double mass = 0.0;
  HermiteSpline cumulative;

  BumpTable() {
    using boost::math::quadrature::gauss_kronrod;
    const int n = 4001;
    std::vector<double> t(n), v(n), dv(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      t[i] = -1.0 + 2.0 * i / (n - 1);
      if (i > 0) acc += gauss_kronrod<double, 31>::integrate(mollifier, t[i - 1], t[i], 0, 0.0);
      v[i] = acc;
      dv[i] = mollifier(t[i]);
    }
    mass = acc;
    for (int i = 0; i < n; ++i) {
      v[i] /= mass;
      dv[i] /= mass;
    }
    cumulative = HermiteSpline(t, v, dv);
  }
};

const BumpTable& bump_table() {
  static const BumpTable table;
  return table;
}

Curve segment_curve(const Segment& s) {
  GeometryOptions loose;
  loose.monotone_tol = 1e-9;
  const double L = s.length();
  Curve c = build_curve(s.x, s.y, L > 0.0 ? L : 1.0, loose);
  if (speed_deviation(c) > 1e-9) c = reparametrize_constant_speed(c);
  return c;
}

double segment_area(const Segment& s) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
    a += kPi * (s.y[i] + s.y[i + 1]) * std::hypot(s.x[i + 1] - s.x[i], s.y[i + 1] - s.y[i]);
  return a;
}

double membrane_area(const LimitMembrane& mem) {
  double a = 0.0;
  for (const auto& s : mem.segments) a += segment_area(s);
  return a;
}

double membrane_phase_integral(const LimitMembrane& mem) {
  double a = 0.0;
  for (const auto& s : mem.segments) a += s.phase * segment_area(s);
  return a;
}

bool close(Point a, Point b, double scale) { return std::hypot(a.x - b.x, a.y - b.y) <= 1e-9 * scale; }

double end_angle(const Segment& s, bool at_front) {
  const std::size_t n = s.x.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "segment needs at least two points");
  // Second-order one-sided differences in chord arclength when spacing allows.
  if (at_front) {
    if (n >= 3) {
      const double dx = -1.5 * s.x[0] + 2.0 * s.x[1] - 0.5 * s.x[2];
      const double dy = -1.5 * s.y[0] + 2.0 * s.y[1] - 0.5 * s.y[2];
      return std::atan2(dy, dx);
    }
    return std::atan2(s.y[1] - s.y[0], s.x[1] - s.x[0]);
  }
  if (n >= 3) {
    const double dx = 1.5 * s.x[n - 1] - 2.0 * s.x[n - 2] + 0.5 * s.x[n - 3];
    const double dy = 1.5 * s.y[n - 1] - 2.0 * s.y[n - 2] + 0.5 * s.y[n - 3];
    return std::atan2(dy, dx);
  }
  return std::atan2(s.y[n - 1] - s.y[n - 2], s.x[n - 1] - s.x[n - 2]);
}

}  // namespace

double bump(double s, double a, double b) {
  const double lo = a + (b - a) / 3.0, hi = a + 2.0 * (b - a) / 3.0;
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  return mollifier((s - mid) / half) / (bump_table().mass * half);
}

double smooth_step(double s, double a, double b) {
  const double lo = a + (b - a) / 3.0, hi = a + 2.0 * (b - a) / 3.0;
  if (s <= lo) return 0.0;
  if (s >= hi) return 1.0;
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  return bump_table().cumulative((s - mid) / half);
}

double Segment::length() const {
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) L += std::hypot(x[i + 1] - x[i], y[i + 1] - y[i]);
  return L;
}

double LimitMembrane::total_length() const {
  double L = 0.0;
  for (const auto& s : segments) L += s.length();
  for (const auto& a : axis_segments) L += a.length;
  return L;
}

const Kink* LimitMembrane::kink_after(std::size_t segment) const {
  for (const auto& k : kinks)
    if (k.segment == segment) return &k;
  return nullptr;
}

const AxisSegment* LimitMembrane::axis_before(std::size_t segment) const {
  for (const auto& a : axis_segments)
    if (a.before_segment == segment) return &a;
  return nullptr;
}

void validate_membrane(const LimitMembrane& mem) {
  const double scale = std::max(1.0, mem.total_length());
  for (std::size_t j = 0; j < mem.segments.size(); ++j) {
    const auto& s = mem.segments[j];
    if (s.x.size() != s.y.size() || s.x.size() < 2)
      fail(ErrorCode::InvalidArgument, "segment " + std::to_string(j) + " is malformed");
    if (s.phase != 1 && s.phase != -1) fail(ErrorCode::InvalidArgument, "segment phase must be +1 or -1");
    for (double y : s.y)
      if (y < 0.0) fail(ErrorCode::NegativeY, "segment " + std::to_string(j) + " dips below the axis");
    if (j == 0) continue;
    Point expected = mem.segments[j - 1].back();
    if (const auto* a = mem.axis_before(j)) expected.x += a->length;
    if (!close(expected, s.front(), scale))
      fail(ErrorCode::InvalidArgument, "segments " + std::to_string(j - 1) + " and " + std::to_string(j) +
                                           " do not meet");
  }
  for (const auto& k : mem.kinks) {
    if (k.segment + 1 >= mem.segments.size()) fail(ErrorCode::InvalidArgument, "kink beyond last junction");
    if (mem.axis_before(k.segment + 1)) fail(ErrorCode::InvalidArgument, "kink on an axis junction");
    if (k.jump_angle < 0.0 || k.jump_angle > kPi) fail(ErrorCode::InvalidArgument, "jump angle outside [0, pi]");
    if (k.height < 0.0) fail(ErrorCode::NegativeY, "kink below the axis");
  }
  for (const auto& a : mem.axis_segments)
    if (a.length < 0.0 || a.before_segment == 0 || a.before_segment >= mem.segments.size())
      fail(ErrorCode::InvalidArgument, "axis segment is malformed");
}

double measured_jump_angle(const LimitMembrane& mem, std::size_t kink) {
  const auto& k = mem.kinks.at(kink);
  const double a = end_angle(mem.segments.at(k.segment), false);
  const double b = end_angle(mem.segments.at(k.segment + 1), true);
  double d = std::abs(b - a);
  if (d > kPi) d = 2.0 * kPi - d;
  return d;
}

void check_jump_angles(const LimitMembrane& mem, double tol) {
  for (std::size_t k = 0; k < mem.kinks.size(); ++k) {
    const double measured = measured_jump_angle(mem, k);
    if (std::abs(measured - mem.kinks[k].jump_angle) > tol)
      fail(ErrorCode::InvalidArgument, "kink " + std::to_string(k) + " stores jump angle " +
                                           std::to_string(mem.kinks[k].jump_angle) + " but segments give " +
                                           std::to_string(measured));
  }
}

double kink_line_tension(const Kink& k, const LimitMembrane& mem, const MaterialModel& m) {
  if (k.proper_interface) return m.sigma_plus + m.sigma_minus;
  if (k.jump_angle <= 0.0) return 0.0;
  const int phase = mem.segments.at(k.segment).phase;
  return phase > 0 ? 2.0 * m.sigma_plus : 2.0 * m.sigma_minus;
}

double limit_helfrich(const LimitMembrane& mem, const MaterialModel& m) {
  double total = 0.0;
  for (const auto& s : mem.segments) {
    if (s.x.size() < 3 || segment_area(s) <= 0.0) continue;
    const Curve c = segment_curve(s);
    const auto e = total_energy(c, PhaseField(c.size(), static_cast<double>(s.phase)), m, 1.0, Variant::E_eps);
    total += e.helfrich;
  }
  return total;
}

double limit_interface(const LimitMembrane& mem, const MaterialModel& m) {
  double total = 0.0;
  for (const auto& k : mem.kinks) total += (kink_line_tension(k, mem, m) + m.sigma_hat * k.jump_angle) * k.height;
  double axis = 0.0;
  for (const auto& a : mem.axis_segments) axis += a.length;
  for (const auto& s : mem.segments)
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
      if (s.y[i] == 0.0 && s.y[i + 1] == 0.0) axis += std::hypot(s.x[i + 1] - s.x[i], s.y[i + 1] - s.y[i]);
  return 2.0 * kPi * (total + m.sigma_hat * axis);
}

EnergyBreakdown total_limit_energy(const LimitMembrane& mem, const MaterialModel& m) {
  EnergyBreakdown e;
  e.helfrich = limit_helfrich(mem, m);
  e.interface_well = limit_interface(mem, m);
  e.total = e.helfrich + e.interface_well;
  e.area = membrane_area(mem);
  e.phase_integral = membrane_phase_integral(mem);
  for (const auto& s : mem.segments)
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
      e.volume += kPi * (s.x[i + 1] - s.x[i]) * (s.y[i] * s.y[i] + s.y[i] * s.y[i + 1] + s.y[i + 1] * s.y[i + 1]) / 3.0;
  return e;
}

namespace {

// Ordered view of a membrane used while editing it.
struct Piece {
  bool axis = false;
  double axis_length = 0.0;
  Segment segment;
  bool has_kink_after = false;
  Kink kink;  // junction to the next segment piece
};

std::vector<Piece> to_pieces(const LimitMembrane& mem) {
  std::vector<Piece> out;
  for (std::size_t j = 0; j < mem.segments.size(); ++j) {
    if (const auto* a = mem.axis_before(j)) {
      Piece p;
      p.axis = true;
      p.axis_length = a->length;
      out.push_back(p);
    }
    Piece p;
    p.segment = mem.segments[j];
    if (const auto* k = mem.kink_after(j)) {
      p.has_kink_after = true;
      p.kink = *k;
    }
    out.push_back(std::move(p));
  }
  return out;
}

LimitMembrane from_pieces(std::vector<Piece> pieces, double speed) {
  // Merge neighbouring axis pieces and drop those at the ends.
  std::vector<Piece> merged;
  for (auto& p : pieces) {
    if (p.axis && !merged.empty() && merged.back().axis) {
      merged.back().axis_length += p.axis_length;
      continue;
    }
    merged.push_back(std::move(p));
  }
  while (!merged.empty() && merged.front().axis) merged.erase(merged.begin());
  while (!merged.empty() && merged.back().axis) merged.pop_back();

  LimitMembrane mem;
  mem.speed = speed;
  double s = 0.0;
  double pending_axis = -1.0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    auto& p = merged[i];
    if (p.axis) {
      pending_axis = p.axis_length;
      s += p.axis_length;
      continue;
    }
    const std::size_t idx = mem.segments.size();
    if (pending_axis >= 0.0) {
      mem.axis_segments.push_back({pending_axis, idx});
      pending_axis = -1.0;
    }
    s += p.segment.length();
    const bool next_is_segment = i + 1 < merged.size() && !merged[i + 1].axis;
    if (p.has_kink_after && next_is_segment) {
      Kink k = p.kink;
      k.segment = idx;
      k.position = s;
      k.height = p.segment.y.back();
      mem.kinks.push_back(k);
    }
    mem.segments.push_back(std::move(p.segment));
  }
  return mem;
}

struct CutPoint {
  Point p;
  double angle = 0.0;
};

CutPoint point_at_arclength(const Segment& s, double target) {
  std::vector<double> t(s.x.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::hypot(s.x[i] - s.x[i - 1], s.y[i] - s.y[i - 1]);
  const CubicSpline sx(t, s.x), sy(t, s.y);
  target = std::clamp(target, 0.0, t.back());
  return {{sx(target), sy(target)}, std::atan2(sy.derivative(target), sx.derivative(target))};
}

Segment vertical(double x, double y0, double y1, int phase, double spacing) {
  Segment v;
  v.phase = phase;
  const std::size_t n = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(std::abs(y1 - y0) / spacing)) + 1);
  for (std::size_t i = 0; i < n; ++i) {
    v.x.push_back(x);
    v.y.push_back(y0 + (y1 - y0) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return v;
}

double typical_spacing(const Segment& s) {
  return s.length() / static_cast<double>(std::max<std::size_t>(1, s.x.size() - 1));
}

// Replaces the first (at_front) or last arclength delta of the segment by a vertical line.
void square_end(std::vector<Piece>& pieces, std::size_t index, bool at_front, double delta, bool at_boundary) {
  Segment& s = pieces[index].segment;
  const double L = s.length();
  const double cut = std::min(delta, L / 3.0);
  const CutPoint c = point_at_arclength(s, at_front ? cut : L - cut);
  const double h = typical_spacing(s);

  std::vector<double> t(s.x.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::hypot(s.x[i] - s.x[i - 1], s.y[i] - s.y[i - 1]);
  Segment rest;
  rest.phase = s.phase;
  if (at_front) {
    rest.x.push_back(c.p.x);
    rest.y.push_back(c.p.y);
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] > cut + 1e-12 * L) {
        rest.x.push_back(s.x[i]);
        rest.y.push_back(s.y[i]);
      }
  } else {
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] < L - cut - 1e-12 * L) {
        rest.x.push_back(s.x[i]);
        rest.y.push_back(s.y[i]);
      }
    rest.x.push_back(c.p.x);
    rest.y.push_back(c.p.y);
  }

  Piece drop;
  drop.segment = at_front ? vertical(c.p.x, 0.0, c.p.y, s.phase, h) : vertical(c.p.x, c.p.y, 0.0, s.phase, h);
  Kink k;
  k.height = c.p.y;
  k.proper_interface = false;
  k.jump_angle = at_front ? std::abs(kPi / 2.0 - c.angle) : std::abs(c.angle + kPi / 2.0);
  k.jump_angle = std::min(k.jump_angle, kPi);

  Piece horizontal;
  horizontal.axis = true;
  const Point original_end = at_front ? s.front() : s.back();
  horizontal.axis_length = std::abs(c.p.x - original_end.x);

  Piece body = pieces[index];
  body.segment = std::move(rest);
  std::vector<Piece> replacement;
  if (at_front) {
    drop.has_kink_after = true;
    drop.kink = k;
    if (!at_boundary) replacement.push_back(horizontal);
    replacement.push_back(std::move(drop));
    replacement.push_back(std::move(body));
  } else {
    body.has_kink_after = true;
    body.kink = k;
    replacement.push_back(std::move(body));
    replacement.push_back(std::move(drop));
    if (!at_boundary) replacement.push_back(horizontal);
  }
  pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(index));
  pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(index), replacement.begin(), replacement.end());
}

bool perpendicular_at_axis(const Segment& s, bool at_front) {
  const double a = end_angle(s, at_front);
  return std::abs(std::abs(a) - kPi / 2.0) < 1e-2;
}

}  // namespace

Simplified simplify_membrane(const LimitMembrane& mem, double delta, const MaterialModel& m) {
  if (!(delta > 0.0)) fail(ErrorCode::InvalidArgument, "delta must be positive");
  validate_membrane(mem);
  Simplified out;
  SimplifyReport& rep = out.report;
  rep.energy_before = total_limit_energy(mem, m).total;
  rep.area_before = membrane_area(mem);
  rep.phase_integral_before = membrane_phase_integral(mem);

  std::vector<Piece> pieces = to_pieces(mem);

  // Components are maximal runs of segment pieces between axis pieces.
  struct Range {
    std::size_t first, last;
  };
  const auto components = [&pieces]() {
    std::vector<Range> out;
    std::size_t i = 0;
    while (i < pieces.size()) {
      if (pieces[i].axis) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < pieces.size() && !pieces[j + 1].axis) ++j;
      out.push_back({i, j});
      i = j + 1;
    }
    return out;
  };

  // Remove short components, replacing each by its shadow on the axis.
  auto comps = components();
  for (auto it = comps.rbegin(); it != comps.rend(); ++it) {
    double L = 0.0;
    for (std::size_t k = it->first; k <= it->last; ++k) L += pieces[k].segment.length();
    if (L >= delta) continue;
    Piece horizontal;
    horizontal.axis = true;
    horizontal.axis_length = pieces[it->last].segment.x.back() - pieces[it->first].segment.x.front();
    pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(it->first),
                 pieces.begin() + static_cast<std::ptrdiff_t>(it->last) + 1);
    pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(it->first), horizontal);
    ++rep.removed_components;
  }
  comps = components();
  if (comps.empty()) fail(ErrorCode::EmptyResult, "every component is shorter than delta");
  const std::size_t first_piece = comps.front().first;
  const std::size_t last_piece = comps.back().last;

  // Square off component ends that lie on the axis, last first so indices stay valid.
  for (auto it = comps.rbegin(); it != comps.rend(); ++it) {
    const bool right_boundary = it->last == last_piece;
    const bool left_boundary = it->first == first_piece;
    const Segment& tail = pieces[it->last].segment;
    if (tail.y.back() == 0.0 && !(right_boundary && perpendicular_at_axis(tail, false))) {
      square_end(pieces, it->last, false, delta, right_boundary);
      ++rep.modified_ends;
    }
    const Segment& head = pieces[it->first].segment;
    if (head.y.front() == 0.0 && !(left_boundary && perpendicular_at_axis(head, true))) {
      square_end(pieces, it->first, true, delta, left_boundary);
      ++rep.modified_ends;
    }
  }

  LimitMembrane result = from_pieces(std::move(pieces), mem.speed);
  rep.area_after_cut = membrane_area(result);

  // Restore the area with a bump on the longest segment.
  std::size_t host = 0;
  double best = -1.0;
  for (std::size_t j = 0; j < result.segments.size(); ++j) {
    const auto& s = result.segments[j];
    const bool is_vertical = s.x.front() == s.x.back();
    if (!is_vertical && s.length() > best) {
      best = s.length();
      host = j;
    }
  }
  if (best > 0.0 && rep.area_after_cut != rep.area_before) {
    const Segment base = result.segments[host];
    std::vector<double> t(base.x.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] + std::hypot(base.x[i] - base.x[i - 1], base.y[i] - base.y[i - 1]);
    const double L = t.back();
    const auto area_for = [&](double alpha) {
      Segment s = base;
      for (std::size_t i = 0; i < t.size(); ++i) s.y[i] = std::max(0.0, base.y[i] + alpha * L * bump(t[i], 0.0, L) / 10.0);
      result.segments[host] = s;
      return membrane_area(result);
    };
    double a0 = 0.0, f0 = area_for(a0) - rep.area_before;
    double a1 = 1e-3, f1 = area_for(a1) - rep.area_before;
    for (int it = 0; it < 50 && std::abs(f1) > 1e-13 * rep.area_before; ++it) {
      if (f1 == f0) break;
      const double a2 = a1 - f1 * (a1 - a0) / (f1 - f0);
      a0 = a1;
      f0 = f1;
      a1 = a2;
      f1 = area_for(a1) - rep.area_before;
    }
    area_for(a1);
    for (auto& k : result.kinks) k.height = result.segments[k.segment].y.back();
  }
  rep.area_after = membrane_area(result);
  rep.phase_integral_after = membrane_phase_integral(result);
  rep.energy_after = total_limit_energy(result, m).total;
  out.membrane = std::move(result);
  return out;
}

}  // namespace membrane
