#include "membrane/recovery.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "membrane/errors.hpp"

namespace membrane {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSwitch = 1e-6;
constexpr double kSampleStep = 1e-3;

// Integrates dp/dtau = sqrt(W(p)) * dir from p = 0 and samples on tau = k * step.
std::vector<double> integrate_branch(const DoubleWell& w, double T, int dir, double rate,
                                     double& switch_tau) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  const double target = static_cast<double>(dir);
  const auto rhs = [&w, dir](const State& p, State& dp, double) {
    dp[0] = dir * std::sqrt(std::max(0.0, w(p[0])));
  };
  auto stepper = odeint::make_dense_output(1e-14, 1e-14, odeint::runge_kutta_dopri5<State>());
  State p{0.0};
  stepper.initialize(p, 0.0, 1e-4);
  const auto count = static_cast<std::size_t>(std::llround(T / kSampleStep));
  std::vector<double> out(count + 1, 0.0);
  switch_tau = T;
  bool switched = false;
  double p_switch = 0.0;
  for (std::size_t k = 1; k <= count; ++k) {
    const double tau = static_cast<double>(k) * kSampleStep;
    if (!switched) {
      while (stepper.current_time() < tau) stepper.do_step(rhs);
      State q;
      stepper.calc_state(tau, q);
      out[k] = q[0];
      if (std::abs(target - q[0]) < kSwitch && rate > 0.0) {
        switched = true;
        switch_tau = tau;
        p_switch = q[0];
      }
    } else {
      out[k] = target - (target - p_switch) * std::exp(-rate * (tau - switch_tau));
    }
  }
  return out;
}

double decay_rate(const DoubleWell& w, double at) {
  const double d2 = w.second_derivative(at);
  return d2 > 0.0 ? std::sqrt(0.5 * d2) : 0.0;
}

}  // namespace

Profile optimal_profile(const DoubleWell& w, double T) {
  if (!(T > 0.0)) fail(ErrorCode::InvalidArgument, "profile window must be positive");
  Profile p;
  p.T_ = T;
  p.rate_plus_ = decay_rate(w, 1.0);
  p.rate_minus_ = decay_rate(w, -1.0);
  double tau_plus = 0.0, tau_minus = 0.0;
  const auto plus = integrate_branch(w, T, 1, p.rate_plus_, tau_plus);
  const auto minus = integrate_branch(w, T, -1, p.rate_minus_, tau_minus);
  const std::size_t count = plus.size() - 1;
  std::vector<double> t, v, dv;
  t.reserve(2 * count + 1);
  for (std::size_t k = count; k >= 1; --k) {
    t.push_back(-static_cast<double>(k) * kSampleStep);
    v.push_back(minus[k]);
  }
  for (std::size_t k = 0; k <= count; ++k) {
    t.push_back(static_cast<double>(k) * kSampleStep);
    v.push_back(plus[k]);
  }
  dv.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dv[i] = std::sqrt(std::max(0.0, w(v[i])));
  p.t_lo_ = t.front();
  p.t_hi_ = t.back();
  p.p_lo_ = v.front();
  p.p_hi_ = v.back();
  p.samples_ = HermiteSpline(std::move(t), std::move(v), std::move(dv));
  return p;
}

double Profile::operator()(double t) const {
  if (t > t_hi_) return 1.0 - (1.0 - p_hi_) * std::exp(-rate_plus_ * (t - t_hi_));
  if (t < t_lo_) return -1.0 + (p_lo_ + 1.0) * std::exp(-rate_minus_ * (t_lo_ - t));
  return samples_(t);
}

double Profile::derivative(double t) const {
  if (t > t_hi_) return rate_plus_ * (1.0 - (*this)(t));
  if (t < t_lo_) return rate_minus_ * ((*this)(t) + 1.0);
  return samples_.derivative(t);
}

double Profile::max_residual(const DoubleWell& w) const {
  double worst = 0.0;
  const double step = kSampleStep / 2.0;
  for (double t = t_lo_; t <= t_hi_; t += step) {
    const double r = std::abs(derivative(t) - std::sqrt(std::max(0.0, w((*this)(t)))));
    worst = std::max(worst, r);
  }
  return worst;
}

double profile_energy(const Profile& p, const DoubleWell& w, double T) {
  // Composite Simpson on a fine grid.
  const std::size_t n = 200000;
  const double h = 2.0 * T / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = -T + h * static_cast<double>(i);
    const double d = p.derivative(t);
    const double f = d * d + w(p(t));
    const double c = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += c * f;
  }
  return acc * h / 3.0;
}

RecoveryParams recovery_params(const Profile& p, double eps, double delta, int sign) {
  RecoveryParams r;
  r.eps = eps;
  r.delta = delta;
  r.profile_end = delta + std::sqrt(eps);
  r.cap_end = r.profile_end + eps * (1.0 - std::abs(p(sign / std::sqrt(eps))));
  return r;
}

double p_eps(const Profile& p, double eps, double delta, double t, int sign) {
  const double root = std::sqrt(eps);
  if (t <= delta) return 0.0;
  if (t <= delta + root) return p(sign * (t - delta) / eps);
  const double edge = p(sign / root);
  const double cap = eps * (1.0 - std::abs(edge));
  if (t <= delta + root + cap) return edge + sign * (t - delta - root) / eps;
  return static_cast<double>(sign);
}

double kink_delta(double jump_angle, double eps, double sigma_hat) { return jump_angle * eps / sigma_hat; }

double axis_alpha(double sigma_hat) { return 2.0 * kPi / (sigma_hat * (kPi - 2.0)); }

namespace {

double sinc(double z) { return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

// Displacement after arclength r along a path whose angle moves linearly from
// phi0 with rate k.
Point turn(double phi0, double k, double r) {
  const double half = 0.5 * k * r;
  const double s = r * sinc(half);
  return {s * std::cos(phi0 + half), s * std::sin(phi0 + half)};
}

struct Path {
  CubicSpline x, y;
  double length = 0.0;

  explicit Path(const Segment& s) {
    std::vector<double> t(s.x.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::hypot(s.x[i] - s.x[i - 1], s.y[i] - s.y[i - 1]);
    length = t.back();
    x = CubicSpline(t, s.x);
    y = CubicSpline(t, s.y);
  }
  Point at(double s) const { return {x(s), y(s)}; }
  double angle(double s) const { return std::atan2(y.derivative(s), x.derivative(s)); }
};

struct Sample {
  double x, y, u, s;
};

struct KinkUnit {
  std::vector<Sample> samples;
  double delta = 0.0;
  Point shift{};
};

enum class JunctionKind { Smooth, Kink, Axis };

int phase_sign(int phase) { return phase >= 0 ? 1 : -1; }

double phase_window(const Profile& p, double eps, double delta, int sign) {
  return recovery_params(p, eps, delta, sign).cap_end;
}

// Samples s in [-a, a) (or [-a, a] when closed) around the junction of left and right.
KinkUnit kink_unit(const Path& left, const Path& right, int phase_left, int phase_right, bool proper,
                   double jump, double eps, double a, double h, const Profile& prof,
                   const MaterialModel& m, bool closed) {
  if (!proper && phase_left != phase_right)
    fail(ErrorCode::InvalidArgument, "phase changes across a junction that is not an interface");
  KinkUnit unit;
  const double delta = kink_delta(jump, eps, m.sigma_hat);
  unit.delta = delta;
  if (delta >= 0.5 * a) fail(ErrorCode::EpsTooLarge, "kink plateau does not fit into its window");
  const bool needs_phase = proper || jump > 0.0;
  if (needs_phase) {
    const double reach = std::max(phase_window(prof, eps, delta, phase_sign(phase_left)),
                                  phase_window(prof, eps, delta, phase_sign(phase_right)));
    if (reach >= a) fail(ErrorCode::EpsTooLarge, "phase transition does not fit into the kink window");
  }

  Point start{}, end_tilde{}, end_orig{};
  double phi0 = 0.0, rate = 0.0;
  if (delta > 0.0) {
    start = left.at(left.length - delta);
    phi0 = left.angle(left.length - delta);
    double phi1 = right.angle(delta);
    while (phi1 - phi0 > kPi) phi1 -= 2.0 * kPi;
    while (phi1 - phi0 < -kPi) phi1 += 2.0 * kPi;
    rate = (phi1 - phi0) / (2.0 * delta);
    const Point d = turn(phi0, rate, 2.0 * delta);
    end_tilde = {start.x + d.x, start.y + d.y};
    end_orig = right.at(delta);
    unit.shift = {end_tilde.x - end_orig.x, end_tilde.y - end_orig.y};
  }

  const auto n = static_cast<std::size_t>(std::max(4.0, std::ceil(2.0 * a / h)));
  const double step = 2.0 * a / static_cast<double>(n);
  const std::size_t count = closed ? n + 1 : n;
  unit.samples.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double s = -a + step * static_cast<double>(k);
    Point p;
    if (s <= -delta) {
      p = left.at(left.length + s);
    } else if (s < delta) {
      const Point d = turn(phi0, rate, s + delta);
      p = {start.x + d.x, start.y + d.y};
    } else {
      p = right.at(s);
      p.x += unit.shift.x;
      p.y += unit.shift.y * (1.0 - smooth_step(s, delta, a));
    }
    double u = 0.0;
    if (!needs_phase) {
      u = phase_right;
    } else if (proper && phase_left != phase_right) {
      u = s < 0.0 ? p_eps(prof, eps, delta, -s, phase_sign(phase_left))
                  : p_eps(prof, eps, delta, s, phase_sign(phase_right));
    } else {
      u = p_eps(prof, eps, delta, std::abs(s), phase_sign(phase_right));
    }
    unit.samples.push_back({p.x, p.y, u, s});
  }
  return unit;
}

bool is_vertical(const Path& p, double from, double to, double dir) {
  for (double s : {from, 0.5 * (from + to), to})
    if (std::abs(p.angle(s) - dir * kPi / 2.0) > 1e-6) return false;
  return true;
}

// Vertical part of an axis corner as a function of the distance tau from the corner,
// expressed relative to the point of the limit curve on the axis.
Point corner_point(double tau, double alpha_eps, double lift, bool rising) {
  if (tau >= alpha_eps) return {rising ? 2.0 * alpha_eps / kPi : 0.0, tau};
  const double k = kPi / (2.0 * alpha_eps);
  if (rising) {
    const Point d = turn(0.0, k, tau);
    return {d.x, lift + d.y};
  }
  // Descending ramp traversed from the vertical towards the axis.
  const double r = alpha_eps - tau;
  const Point d = turn(-kPi / 2.0, k, r);
  return {d.x, alpha_eps + d.y};
}

Curve curve_from_samples(const std::vector<Sample>& samples, double param_length) {
  std::vector<double> x(samples.size()), y(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x[i] = samples[i].x;
    y[i] = std::max(0.0, samples[i].y);
  }
  GeometryOptions loose;
  loose.monotone_tol = 1e-9;
  try {
    return build_curve(std::move(x), std::move(y), param_length, loose);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonMonotoneX) fail(ErrorCode::AssemblyOverlap, e.what());
    throw;
  }
}

std::pair<std::size_t, std::size_t> index_range(const std::vector<double>& s, double lo, double hi) {
  std::size_t first = s.size(), last = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] >= lo - 1e-12 && s[i] <= hi + 1e-12) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  if (first > last) fail(ErrorCode::InvalidArgument, "empty index range");
  return {first, last};
}

double polyline_area(const Curve& c, std::size_t first, std::size_t last) {
  double a = 0.0;
  for (std::size_t k = first; k < last; ++k) a += kPi * (c.y[k] + c.y[k + 1]) * c.chord(k);
  return a;
}

}  // namespace

KinkRecovery smooth_kink(const LimitMembrane& mem, std::size_t kink_index, double eps, const MaterialModel& m,
                         const KinkOptions& opts) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  if (kink_index >= mem.kinks.size()) fail(ErrorCode::InvalidArgument, "no such kink");
  const Kink& k = mem.kinks[kink_index];
  const Segment& ls = mem.segments.at(k.segment);
  const Segment& rs = mem.segments.at(k.segment + 1);
  const Path left(ls), right(rs);
  const double a = opts.window > 0.0 ? opts.window : 0.5 * std::min(left.length, right.length);
  if (a > std::min(left.length, right.length)) fail(ErrorCode::InvalidArgument, "window exceeds a neighbour");
  const double delta = kink_delta(k.jump_angle, eps, m.sigma_hat);
  const double h = opts.spacing > 0.0 ? opts.spacing : (delta > 0.0 ? std::min(delta, eps) / 200.0 : eps / 200.0);
  const Profile prof = optimal_profile(m.W);
  const KinkUnit unit = kink_unit(left, right, ls.phase, rs.phase, k.proper_interface, k.jump_angle, eps, a, h,
                                  prof, m, true);

  KinkRecovery out;
  out.fragment.arclength.reserve(unit.samples.size());
  out.fragment.phase.reserve(unit.samples.size());
  for (const auto& s : unit.samples) {
    out.fragment.arclength.push_back(s.s);
    out.fragment.phase.push_back(s.u);
  }
  out.fragment.curve = curve_from_samples(unit.samples, 2.0 * a);
  const Curve& c = out.fragment.curve;

  KinkReport& rep = out.report;
  rep.delta = delta;
  rep.window = a;
  rep.x_shift = unit.shift.x;
  rep.y_correction = unit.shift.y;
  EnergyOptions eo;
  eo.eps = eps;
  eo.variant = Variant::F_eps;
  const auto whole = total_energy(c, out.fragment.phase, m, eo);
  rep.interface_total = whole.interface();
  rep.helfrich_total = whole.helfrich;
  if (delta > 0.0) {
    const auto [first, last] = index_range(out.fragment.arclength, -delta, delta);
    eo.first = first;
    eo.last = last;
    rep.interface_on_plateau = total_energy(c, out.fragment.phase, m, eo).interface();
    const auto curv = curvatures(c);
    const auto meas = measures(c);
    double avg_y = 0.0, k2 = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      const double f = (i == first || i == last) ? 0.5 : 1.0;
      avg_y += f * c.y[i];
      k2 += f * curv.kappa2[i] * curv.kappa2[i] * meas.w[i];
    }
    avg_y /= static_cast<double>(last - first);
    rep.identity_value = 2.0 * kPi *
                             (2.0 * delta / eps * m.W(0.0) + eps / (2.0 * delta) * k.jump_angle * k.jump_angle) *
                             avg_y +
                         eps * k2;
  }
  rep.limit_interface = 2.0 * kPi * (kink_line_tension(k, mem, m) + m.sigma_hat * k.jump_angle) * k.height;

  // Drifts against the limit geometry over the same window.
  double limit_area = 0.0, limit_phase = 0.0;
  {
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * a / h));
    Point prev = left.at(left.length - a);
    for (std::size_t i = 1; i <= n; ++i) {
      const double s = -a + 2.0 * a * static_cast<double>(i) / static_cast<double>(n);
      const Point p = s <= 0.0 ? left.at(left.length + s) : right.at(s);
      const double da = kPi * (prev.y + p.y) * std::hypot(p.x - prev.x, p.y - prev.y);
      limit_area += da;
      limit_phase += da * (s <= 0.0 ? ls.phase : rs.phase);
      prev = p;
    }
  }
  rep.area_drift = polyline_area(c, 0, c.size() - 1) - limit_area;
  rep.phase_drift = whole.phase_integral - limit_phase;
  return out;
}

AxisRecovery axis_recovery(double eps, double length, double vertical, const MaterialModel& m, int left_phase,
                           int right_phase, double spacing) {
  if (!(eps > 0.0) || !(length >= 0.0)) fail(ErrorCode::InvalidArgument, "axis recovery needs eps > 0");
  const double alpha = axis_alpha(m.sigma_hat);
  const double ae = alpha * eps;
  const double lift = 2.0 * eps / m.sigma_hat;
  const Profile prof = optimal_profile(m.W);
  const double reach = std::max(phase_window(prof, eps, ae, phase_sign(left_phase)),
                                phase_window(prof, eps, ae, phase_sign(right_phase)));
  if (reach >= vertical) fail(ErrorCode::EpsTooLarge, "vertical parts are too short for the axis construction");
  const double h = spacing > 0.0 ? spacing : std::min(eps, ae) / 40.0;

  std::vector<Sample> samples;
  const auto nv = static_cast<std::size_t>(std::ceil(vertical / h));
  for (std::size_t i = 0; i < nv; ++i) {
    const double tau = vertical - vertical * static_cast<double>(i) / static_cast<double>(nv);
    const Point p = corner_point(tau, ae, lift, false);
    samples.push_back({p.x, p.y, p_eps(prof, eps, ae, tau, phase_sign(left_phase)), -tau});
  }
  const double x0 = 2.0 * ae / kPi;
  const auto nh = static_cast<std::size_t>(std::max(2.0, std::ceil(length / h)));
  for (std::size_t i = 0; i < nh; ++i) {
    const double r = length * static_cast<double>(i) / static_cast<double>(nh);
    samples.push_back({x0 + r, lift, 0.0, r});
  }
  const double x1 = x0 + length;
  for (std::size_t i = 0; i <= nv; ++i) {
    const double tau = vertical * static_cast<double>(i) / static_cast<double>(nv);
    const Point p = corner_point(tau, ae, lift, true);
    samples.push_back({x1 + p.x, p.y, p_eps(prof, eps, ae, tau, phase_sign(right_phase)), length + tau});
  }

  AxisRecovery out;
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.fragment.arclength.push_back(samples[i].s);
    out.fragment.phase.push_back(samples[i].u);
    if (i > 0) total += std::hypot(samples[i].x - samples[i - 1].x, samples[i].y - samples[i - 1].y);
  }
  out.fragment.curve = curve_from_samples(samples, total);
  const Curve& c = out.fragment.curve;

  AxisReport& rep = out.report;
  rep.alpha = alpha;
  rep.lift = lift;
  rep.limit_on_axis = 2.0 * kPi * m.sigma_hat * length;
  rep.ramp_bound = 2.0 * kPi * 0.5 * m.sigma_hat * ae;
  rep.x_shift = 2.0 * x0;
  EnergyOptions eo;
  eo.eps = eps;
  const auto [first, last] = index_range(out.fragment.arclength, 0.0, length);
  eo.first = first;
  eo.last = last;
  rep.interface_on_axis = total_energy(c, out.fragment.phase, m, eo).interface();
  const auto curv = curvatures(c);
  const auto meas = measures(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double s = out.fragment.arclength[i];
    const bool ramp = (s > -ae && s < 0.0) || (s > length && s < length + ae);
    if (ramp) rep.ramp_kappa2 += eps * curv.kappa2[i] * curv.kappa2[i] * meas.w[i];
  }
  return out;
}

Recovery build_recovery(const LimitMembrane& mem, double eps, const MaterialModel& m, const RecoveryOptions& opts) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  validate_membrane(mem);
  const std::size_t ns = mem.segments.size();
  if (ns == 0) fail(ErrorCode::EmptyResult, "membrane has no segments");

  std::vector<Path> paths;
  paths.reserve(ns);
  for (const auto& s : mem.segments) paths.emplace_back(s);

  const Profile prof = optimal_profile(m.W);
  const double alpha_eps = axis_alpha(m.sigma_hat) * eps;
  const double lift = 2.0 * eps / m.sigma_hat;
  double h = eps / 40.0;
  for (const auto& k : mem.kinks) {
    const double d = kink_delta(k.jump_angle, eps, m.sigma_hat);
    if (d > 0.0) h = std::min(h, d / 10.0);
  }
  if (!mem.axis_segments.empty()) h = std::min(h, alpha_eps / 20.0);

  // Window taken out of each segment end by the junction units.
  std::vector<JunctionKind> kind(ns > 0 ? ns - 1 : 0, JunctionKind::Smooth);
  std::vector<double> cut_end(ns, 0.0), cut_start(ns, 0.0);
  RecoveryReport rep;
  for (std::size_t j = 0; j + 1 < ns; ++j) {
    const Kink* k = mem.kink_after(j);
    const AxisSegment* ax = mem.axis_before(j + 1);
    if (ax) {
      kind[j] = JunctionKind::Axis;
      const double left = 0.5 * paths[j].length, right = 0.5 * paths[j + 1].length;
      if (!is_vertical(paths[j], paths[j].length - left, paths[j].length, -1.0) ||
          !is_vertical(paths[j + 1], 0.0, right, 1.0))
        fail(ErrorCode::NotSimple, "component ends next to the axis must be vertical");
      cut_end[j] = left;
      cut_start[j + 1] = right;
      ++rep.axis_constructions;
    } else if (k && k->height > 0.0 && (k->proper_interface || k->jump_angle > 0.0)) {
      kind[j] = JunctionKind::Kink;
      const double a = 0.5 * std::min(paths[j].length, paths[j + 1].length);
      cut_end[j] = a;
      cut_start[j + 1] = a;
      if (k->jump_angle > 0.0) ++rep.smoothed_kinks;
    } else if (mem.segments[j].phase != mem.segments[j + 1].phase) {
      fail(ErrorCode::InvalidArgument, "phase jump without an interface record");
    }
  }

  std::vector<Sample> dense;
  double offset_x = 0.0;
  double host_length = -1.0, host_lo = 0.0, host_hi = 0.0;
  double arc = 0.0;
  const auto push = [&](double x, double y, double u) {
    if (!dense.empty()) arc += std::hypot(x - dense.back().x, y - dense.back().y);
    dense.push_back({x, y, u, arc});
  };

  for (std::size_t j = 0; j < ns; ++j) {
    const Path& p = paths[j];
    const double lo = cut_start[j], hi = p.length - cut_end[j];
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / h)));
    const double arc_lo = arc + (dense.empty() ? 0.0 : h);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
      const Point q = p.at(s);
      push(q.x + offset_x, q.y, mem.segments[j].phase);
    }
    if (hi - lo > host_length) {
      host_length = hi - lo;
      host_lo = arc_lo;
      host_hi = arc + (hi - lo) / static_cast<double>(n);
    }
    if (j + 1 == ns) {
      const Point q = p.at(p.length);
      push(q.x + offset_x, q.y, mem.segments[j].phase);
      break;
    }
    switch (kind[j]) {
      case JunctionKind::Smooth:
        break;
      case JunctionKind::Kink: {
        const Kink& k = *mem.kink_after(j);
        const KinkUnit unit = kink_unit(p, paths[j + 1], mem.segments[j].phase, mem.segments[j + 1].phase,
                                        k.proper_interface, k.jump_angle, eps, cut_end[j], h, prof, m, false);
        for (const auto& s : unit.samples) push(s.x + offset_x, s.y, s.u);
        offset_x += unit.shift.x;
        rep.x_shift += unit.shift.x;
        break;
      }
      case JunctionKind::Axis: {
        const AxisSegment& ax = *mem.axis_before(j + 1);
        const Point corner = p.at(p.length);
        const int sl = phase_sign(mem.segments[j].phase), sr = phase_sign(mem.segments[j + 1].phase);
        const double reach = std::max(phase_window(prof, eps, alpha_eps, sl), phase_window(prof, eps, alpha_eps, sr));
        if (reach >= std::min(cut_end[j], cut_start[j + 1]))
          fail(ErrorCode::EpsTooLarge, "vertical parts are too short for the axis construction");
        const double left = cut_end[j];
        const auto nv = static_cast<std::size_t>(std::ceil(left / h));
        for (std::size_t i = 0; i < nv; ++i) {
          const double tau = left - left * static_cast<double>(i) / static_cast<double>(nv);
          const Point q = corner_point(tau, alpha_eps, lift, false);
          push(corner.x + offset_x + q.x, q.y, p_eps(prof, eps, alpha_eps, tau, sl));
        }
        const double x0 = corner.x + offset_x + 2.0 * alpha_eps / kPi;
        const auto nh = static_cast<std::size_t>(std::max(2.0, std::ceil(ax.length / h)));
        for (std::size_t i = 0; i < nh; ++i)
          push(x0 + ax.length * static_cast<double>(i) / static_cast<double>(nh), lift, 0.0);
        offset_x += 4.0 * alpha_eps / kPi;
        rep.x_shift += 4.0 * alpha_eps / kPi;
        const Point start = paths[j + 1].at(0.0);
        const double right = cut_start[j + 1];
        const auto nr = static_cast<std::size_t>(std::ceil(right / h));
        for (std::size_t i = 0; i < nr; ++i) {
          const double tau = right * static_cast<double>(i) / static_cast<double>(nr);
          const Point q = corner_point(tau, alpha_eps, lift, true);
          push(start.x + offset_x - 2.0 * alpha_eps / kPi + q.x, q.y, p_eps(prof, eps, alpha_eps, tau, sr));
        }
        break;
      }
    }
  }
  if (dense.size() < 3) fail(ErrorCode::EmptyResult, "recovery produced too few samples");
  dense.front().y = mem.segments.front().y.front() == 0.0 ? 0.0 : dense.front().y;
  dense.back().y = mem.segments.back().y.back() == 0.0 ? 0.0 : dense.back().y;

  const Curve raw = curve_from_samples(dense, arc);
  std::vector<double> u_raw(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) u_raw[i] = dense[i].u;
  std::size_t nodes = opts.nodes;
  if (nodes == 0) {
    const double sp = opts.spacing > 0.0 ? opts.spacing : eps / 20.0;
    nodes = static_cast<std::size_t>(std::ceil(arc / sp)) + 1;
  }
  auto res = reparametrize_with_field(raw, u_raw, nodes);
  Curve c = std::move(res.curve);
  PhaseField u = std::move(res.field);

  const EnergyBreakdown limit = total_limit_energy(mem, m);
  EnergyOptions eo;
  eo.eps = eps;
  eo.variant = opts.variant;
  {
    const auto before = total_energy(c, u, m, eo);
    rep.area_before_repair = before.area;
    rep.phase_before_repair = before.phase_integral;
  }

  if (opts.repair) {
    const double area_target = opts.area_target > 0.0 ? opts.area_target : limit.area;
    const double phase_target = opts.phase_target_set ? opts.phase_target : limit.phase_integral;
    std::vector<double> s(c.size(), 0.0);
    for (std::size_t i = 1; i < c.size(); ++i) s[i] = s[i - 1] + c.chord(i - 1);
    std::vector<double> b(c.size(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) b[i] = bump(s[i], host_lo, host_hi) * (host_hi - host_lo);
    const std::vector<double> y0 = c.y;
    const auto area_for = [&](double alpha) {
      for (std::size_t i = 0; i < c.size(); ++i) c.y[i] = std::max(0.0, y0[i] + alpha * b[i]);
      return measures(c).area - area_target;
    };
    double a0 = 0.0, f0 = area_for(a0);
    double a1 = -f0 / (2.0 * kPi * (host_hi - host_lo)), f1 = area_for(a1);
    for (int it = 0; it < 60 && std::abs(f1) > 1e-13 * area_target; ++it) {
      if (f1 == f0) break;
      const double a2 = a1 - f1 * (a1 - a0) / (f1 - f0);
      a0 = a1;
      f0 = f1;
      a1 = a2;
      f1 = area_for(a1);
    }
    rep.area_bump = a1;
    const auto meas = measures(c);
    double current = 0.0, hw = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      current += u[i] * meas.w[i];
      hw += b[i] * meas.w[i];
    }
    (void)current;
    const double phase_now = total_energy(c, u, m, eo).phase_integral;
    if (hw > 0.0) {
      const double alpha = (phase_target - phase_now) / hw;
      for (std::size_t i = 0; i < c.size(); ++i) u[i] += alpha * b[i];
      rep.phase_bump = alpha;
    }
    rep.energy = total_energy(c, u, m, eo);
    rep.area_residual = rep.energy.area - area_target;
    rep.phase_residual = rep.energy.phase_integral - phase_target;
  } else {
    rep.energy = total_energy(c, u, m, eo);
  }
  rep.limit = limit;
  rep.gap = rep.energy.total - limit.total;
  rep.nodes = c.size();
  return {std::move(c), std::move(u), rep};
}

}  // namespace membrane
