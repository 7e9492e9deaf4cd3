#include "membrane/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "membrane/dual.hpp"
#include "membrane/errors.hpp"

namespace membrane {

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::F_eps: return "F_eps";
    case Variant::E_eps: return "E_eps";
    case Variant::Fhat_eps: return "Fhat_eps";
  }
  return "F_eps";
}

Variant parse_variant(const std::string& name) {
  if (name == "F_eps" || name == "F") return Variant::F_eps;
  if (name == "E_eps" || name == "E") return Variant::E_eps;
  if (name == "Fhat_eps" || name == "Fhat") return Variant::Fhat_eps;
  fail(ErrorCode::InvalidArgument, "unknown energy variant '" + name + "'");
}

void validate_phase_field(const Curve& c, const PhaseField& u, double C0) {
  if (u.size() != c.size()) fail(ErrorCode::InvalidArgument, "phase field and curve sizes differ");
  for (double v : u)
    if (!(std::abs(v) <= C0)) fail(ErrorCode::InvalidArgument, "phase field exceeds its bound C0");
}

namespace {

constexpr double kPi = std::numbers::pi;

double lift(const ScalarLaw& law, double u) { return law.f(u); }
template <int N>
Dual<N> lift(const ScalarLaw& law, const Dual<N>& u) {
  return chain(u, law.f(u.v), law.df(u.v));
}
double well(const DoubleWell& w, double u) { return w(u); }
template <int N>
Dual<N> well(const DoubleWell& w, const Dual<N>& u) {
  return chain(u, w(u.v), w.derivative(u.v));
}

template <class T>
struct NodeTerm {
  T helfrich, well, bending;
};

struct NodeContext {
  const MaterialModel* model;
  Variant variant;
  double eps;
  double eps_bending;
  double dt;
};

// xs, ys hold nodes lo..lo+count-1; node i and its stencil lie inside.
template <class T>
NodeTerm<T> node_term(const T* xs, const T* ys, int lo, std::size_t i, std::size_t n, const T& ui,
                      const stencil::Stencil& s, bool pole, const NodeContext& ctx) {
  const auto g = stencil::local_geometry<T>(xs + (s.first - lo), ys + (s.first - lo), s, ctx.dt,
                                            ys[static_cast<int>(i) - lo], pole);
  const int li = static_cast<int>(i) - lo;
  T lsum(0.0);
  if (i > 0) lsum = lsum + stencil::chord(xs[li - 1], ys[li - 1], xs[li], ys[li]);
  if (i + 1 < n) lsum = lsum + stencil::chord(xs[li], ys[li], xs[li + 1], ys[li + 1]);
  const T w = kPi * ys[li] * lsum;

  const MaterialModel& m = *ctx.model;
  const T H = g.kappa1 + g.kappa2;
  const T B2 = g.kappa1 * g.kappa1 + g.kappa2 * g.kappa2;
  const T dev = H - lift(m.Hs, ui);
  const T k = lift(m.k, ui);
  const T u2 = ui * ui;

  NodeTerm<T> out{T(0.0), T(0.0), T(0.0)};
  switch (ctx.variant) {
    case Variant::F_eps:
      out.helfrich = u2 * k * dev * dev * w;
      out.bending = ctx.eps_bending * B2 * w;
      break;
    case Variant::E_eps:
      out.helfrich = k * dev * dev * w;
      break;
    case Variant::Fhat_eps:
      out.helfrich = u2 * k * dev * dev * w;
      out.bending = ctx.eps_bending * B2 * w;
      break;
  }
  out.well = well(m.W, ui) * (1.0 / ctx.eps) * w;
  return out;
}

template <class T>
T cell_term(const T& xa, const T& ya, const T& ua, const T& xb, const T& yb, const T& ub, double eps) {
  const T du = ub - ua;
  return kPi * eps * du * du * (ya + yb) / stencil::chord(xa, ya, xb, yb);
}

// Gauss curvature term in the form int f dS with S = y'/|gamma'| (the sine of the
// tangent angle), since K dmu = -2 pi dS. S is pinned to +1 and -1 on the axis, so
// the sum telescopes for constant f.
double gauss_weight(const MaterialModel& m, Variant v, double u, double* df) {
  const double kg = m.kG.f(u), dkg = m.kG.df(u);
  switch (v) {
    case Variant::F_eps:
      *df = 2.0 * u * kg + u * u * dkg;
      return u * u * kg;
    case Variant::E_eps:
      *df = dkg;
      return kg;
    case Variant::Fhat_eps:
      break;
  }
  *df = 0.0;
  return 0.0;
}

template <class T>
T tangent_sine(const T* xs, const T* ys, const stencil::Stencil& s) {
  using std::sqrt;
  T xp(0.0), yp(0.0);
  for (int k = 0; k < s.count; ++k) {
    xp = xp + s.d1[k] * xs[k];
    yp = yp + s.d1[k] * ys[k];
  }
  return yp / sqrt(xp * xp + yp * yp);
}

bool pinned_sine(const Curve& c, std::size_t i, double* value) {
  if (c.y[i] != 0.0) return false;
  if (i == 0) *value = 1.0;
  else if (i + 1 == c.size()) *value = -1.0;
  else return false;
  return true;
}

struct Range {
  std::size_t first, last;
};

Range resolve_range(const Curve& c, const EnergyOptions& o) {
  const std::size_t n = c.size();
  const std::size_t last = std::min(o.last, n - 1);
  if (o.first > last) fail(ErrorCode::InvalidArgument, "empty energy index range");
  return {o.first, last};
}

double node_factor(std::size_t i, Range r, std::size_t n) {
  if ((i == r.first && i > 0) || (i == r.last && i + 1 < n)) return 0.5;
  return 1.0;
}

int node_lo(const stencil::Stencil& s, std::size_t i) {
  return std::min(s.first, static_cast<int>(i) - (i > 0 ? 1 : 0));
}
int node_hi(const stencil::Stencil& s, std::size_t i, std::size_t n) {
  return std::max(s.first + s.count - 1, static_cast<int>(i) + (i + 1 < n ? 1 : 0));
}

double gauss_term(const Curve& c, const PhaseField& u, const MaterialModel& m, Variant v, Range r,
                  EnergyGradient* g) {
  if (v == Variant::Fhat_eps) return 0.0;
  const std::size_t n = c.size();
  std::vector<double> S(n, 0.0), f(n, 0.0), df(n, 0.0);
  std::vector<char> pinned(n, 0);
  for (std::size_t i = r.first; i <= r.last; ++i) {
    f[i] = gauss_weight(m, v, u[i], &df[i]);
    if (pinned_sine(c, i, &S[i])) {
      pinned[i] = 1;
    } else {
      const auto s = stencil::at(i, n);
      S[i] = tangent_sine<double>(&c.x[s.first], &c.y[s.first], s);
    }
  }
  double G = 0.0;
  for (std::size_t k = r.first; k < r.last; ++k) G -= kPi * (f[k] + f[k + 1]) * (S[k + 1] - S[k]);
  if (!g) return G;
  using D8 = Dual<8>;
  for (std::size_t i = r.first; i <= r.last; ++i) {
    double dS = 0.0, dF = 0.0;
    if (i > r.first) {
      dS -= kPi * (f[i - 1] + f[i]);
      dF -= kPi * (S[i] - S[i - 1]);
    }
    if (i < r.last) {
      dS += kPi * (f[i] + f[i + 1]);
      dF -= kPi * (S[i + 1] - S[i]);
    }
    g->du[i] += dF * df[i];
    if (pinned[i] || dS == 0.0) continue;
    const auto s = stencil::at(i, n);
    D8 xs[4], ys[4];
    for (int k = 0; k < s.count; ++k) {
      xs[k] = D8::variable(c.x[s.first + k], 2 * k);
      ys[k] = D8::variable(c.y[s.first + k], 2 * k + 1);
    }
    const D8 sd = tangent_sine<D8>(xs, ys, s);
    for (int k = 0; k < s.count; ++k) {
      g->dx[s.first + k] += dS * sd.d[2 * k];
      g->dy[s.first + k] += dS * sd.d[2 * k + 1];
    }
  }
  return G;
}

NodeContext make_context(const Curve& c, const MaterialModel& m, const EnergyOptions& o) {
  if (!(o.eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  return {&m, o.variant, o.eps, std::pow(o.eps, o.bending_exponent), c.dt()};
}

void fill_constraints(const Curve& c, const PhaseField& u, Range r, EnergyBreakdown& e) {
  for (std::size_t k = r.first; k < r.last; ++k) {
    const double l = c.chord(k);
    e.area += kPi * (c.y[k] + c.y[k + 1]) * l;
    e.phase_integral += kPi * l * (c.y[k] * u[k] + c.y[k + 1] * u[k + 1]);
    e.volume += kPi * (c.x[k + 1] - c.x[k]) *
                (c.y[k] * c.y[k] + c.y[k] * c.y[k + 1] + c.y[k + 1] * c.y[k + 1]) / 3.0;
  }
}

}  // namespace

EnergyBreakdown total_energy(const Curve& c, const PhaseField& u, const MaterialModel& m,
                             const EnergyOptions& o) {
  if (u.size() != c.size()) fail(ErrorCode::InvalidArgument, "phase field and curve sizes differ");
  check_pole_tangents(c, o.geometry);
  const std::size_t n = c.size();
  const Range r = resolve_range(c, o);
  const NodeContext ctx = make_context(c, m, o);
  const double pole_height = o.geometry.pole_tol * c.speed * c.dt();

  EnergyBreakdown e;
  for (std::size_t i = r.first; i <= r.last; ++i) {
    if (c.y[i] == 0.0) continue;
    const auto s = stencil::at(i, n);
    const int lo = node_lo(s, i);
    const auto t = node_term<double>(&c.x[lo], &c.y[lo], lo, i, n, u[i], s, c.y[i] <= pole_height, ctx);
    const double f = node_factor(i, r, n);
    e.helfrich += f * t.helfrich;
    e.interface_well += f * t.well;
    e.interface_bending += f * t.bending;
  }
  for (std::size_t k = r.first; k < r.last; ++k)
    e.interface_gradient += cell_term<double>(c.x[k], c.y[k], u[k], c.x[k + 1], c.y[k + 1], u[k + 1], o.eps);
  e.helfrich += gauss_term(c, u, m, o.variant, r, nullptr);
  e.total = e.helfrich + e.interface_gradient + e.interface_well + e.interface_bending;
  fill_constraints(c, u, r, e);
  return e;
}

EnergyBreakdown total_energy(const Curve& c, const PhaseField& u, const MaterialModel& m, double eps,
                             Variant variant) {
  EnergyOptions o;
  o.eps = eps;
  o.variant = variant;
  return total_energy(c, u, m, o);
}

double helfrich_eps(const Curve& c, const PhaseField& u, const MaterialModel& m) {
  return total_energy(c, u, m, 1.0, Variant::F_eps).helfrich;
}

double interface_eps(const Curve& c, const PhaseField& u, const MaterialModel& m, double eps) {
  return total_energy(c, u, m, eps, Variant::F_eps).interface();
}

EnergyGradient energy_partials(const Curve& c, const PhaseField& u, const MaterialModel& m,
                               const EnergyOptions& o) {
  if (u.size() != c.size()) fail(ErrorCode::InvalidArgument, "phase field and curve sizes differ");
  check_pole_tangents(c, o.geometry);
  const std::size_t n = c.size();
  const Range r = resolve_range(c, o);
  const NodeContext ctx = make_context(c, m, o);
  const double pole_height = o.geometry.pole_tol * c.speed * c.dt();

  EnergyGradient g;
  g.dx.assign(n, 0.0);
  g.dy.assign(n, 0.0);
  g.du.assign(n, 0.0);
  EnergyBreakdown& e = g.energy;

  using D9 = Dual<9>;
  for (std::size_t i = r.first; i <= r.last; ++i) {
    if (c.y[i] == 0.0) continue;
    const auto s = stencil::at(i, n);
    const int lo = node_lo(s, i);
    const int cnt = node_hi(s, i, n) - lo + 1;
    D9 xs[4], ys[4];
    for (int j = 0; j < cnt; ++j) {
      xs[j] = D9::variable(c.x[lo + j], 2 * j);
      ys[j] = D9::variable(c.y[lo + j], 2 * j + 1);
    }
    const D9 ui = D9::variable(u[i], 8);
    const auto t = node_term<D9>(xs, ys, lo, i, n, ui, s, c.y[i] <= pole_height, ctx);
    const double f = node_factor(i, r, n);
    e.helfrich += f * t.helfrich.v;
    e.interface_well += f * t.well.v;
    e.interface_bending += f * t.bending.v;
    const D9 sum = t.helfrich + t.well + t.bending;
    for (int j = 0; j < cnt; ++j) {
      g.dx[lo + j] += f * sum.d[2 * j];
      g.dy[lo + j] += f * sum.d[2 * j + 1];
    }
    g.du[i] += f * sum.d[8];
  }
  using D6 = Dual<6>;
  for (std::size_t k = r.first; k < r.last; ++k) {
    const D6 t = cell_term<D6>(D6::variable(c.x[k], 0), D6::variable(c.y[k], 1), D6::variable(u[k], 2),
                               D6::variable(c.x[k + 1], 3), D6::variable(c.y[k + 1], 4),
                               D6::variable(u[k + 1], 5), o.eps);
    e.interface_gradient += t.v;
    g.dx[k] += t.d[0];
    g.dy[k] += t.d[1];
    g.du[k] += t.d[2];
    g.dx[k + 1] += t.d[3];
    g.dy[k + 1] += t.d[4];
    g.du[k + 1] += t.d[5];
  }
  e.helfrich += gauss_term(c, u, m, o.variant, r, &g);
  e.total = e.helfrich + e.interface_gradient + e.interface_well + e.interface_bending;
  fill_constraints(c, u, r, e);
  return g;
}

FirstVariationReport first_variation_bound_check(const Curve& c, const PhaseField& u,
                                                 const MaterialModel& m, double eps,
                                                 double length_slack) {
  FirstVariationReport rep;
  const auto curv = curvatures(c);
  const auto meas = measures(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    rep.integral_B += std::sqrt(curv.B2[i]) * meas.w[i];
    rep.integral_abs_H += std::abs(curv.H[i]) * meas.w[i];
  }
  rep.length = meas.length;
  rep.area = meas.area;
  rep.two_pi_length = 2.0 * kPi * meas.length;
  const auto e = total_energy(c, u, m, eps, Variant::F_eps);
  rep.F_eps = e.total;
  rep.helfrich = e.helfrich;
  const double sup_hs = validate_rigidities(m, 2001).sup_Hs;
  double sup_u = 0.0;
  for (double v : u) sup_u = std::max(sup_u, std::abs(v));
  rep.positivity_floor = -sup_hs * sup_hs * sup_u * sup_u * meas.area;
  rep.ratio = rep.F_eps + 1.0 > 0.0 ? rep.integral_B / (rep.F_eps + 1.0)
                                    : std::numeric_limits<double>::infinity();
  rep.length_bound = rep.integral_abs_H >= rep.two_pi_length - length_slack;
  rep.bending_positivity = rep.helfrich >= rep.positivity_floor;
  return rep;
}

}  // namespace membrane
