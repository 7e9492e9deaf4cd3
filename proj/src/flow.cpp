#include "membrane/flow.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "membrane/errors.hpp"

namespace membrane {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMaxRestoration = 30;
constexpr double kChordTol = 1e-10;

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

std::size_t ix(std::size_t i) { return 3 * i; }
std::size_t iy(std::size_t i) { return 3 * i + 1; }
std::size_t iu(std::size_t i) { return 3 * i + 2; }

EnergyOptions energy_options(const FlowConfig& cfg) {
  EnergyOptions o;
  o.variant = cfg.variant;
  o.eps = cfg.eps;
  o.bending_exponent = cfg.bending_exponent;
  return o;
}

// Constraint rows: N-2 equal-chord rows, two axis pins, two pole tangents, area,
// phase, optional volume.
struct ConstraintSet {
  std::vector<Triplet> jac;  // row, dof, value
  Eigen::VectorXd residual;
  std::size_t rows = 0;
  std::size_t area_row = 0, phase_row = 0, volume_row = 0;
};

double mean_chord(const Curve& c) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) s += c.chord(k);
  return s / static_cast<double>(c.size() - 1);
}

ConstraintSet build_constraints(const Curve& c, const PhaseField& u, const FlowState& st, bool volume) {
  const std::size_t n = c.size();
  ConstraintSet cs;
  const double lbar = mean_chord(c);
  const double scale = 1.0 / (lbar * lbar);
  std::size_t row = 0;
  std::vector<double> rows_value;
  // Squared chords and their gradients.
  std::vector<double> l2(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dx = c.x[k + 1] - c.x[k], dy = c.y[k + 1] - c.y[k];
    l2[k] = dx * dx + dy * dy;
  }
  const auto add_chord = [&](std::size_t r, std::size_t k, double sign) {
    const double dx = c.x[k + 1] - c.x[k], dy = c.y[k + 1] - c.y[k];
    cs.jac.emplace_back(r, ix(k + 1), sign * 2.0 * dx * scale);
    cs.jac.emplace_back(r, ix(k), -sign * 2.0 * dx * scale);
    cs.jac.emplace_back(r, iy(k + 1), sign * 2.0 * dy * scale);
    cs.jac.emplace_back(r, iy(k), -sign * 2.0 * dy * scale);
  };
  for (std::size_t k = 0; k + 2 < n; ++k, ++row) {
    add_chord(row, k, 1.0);
    add_chord(row, k + 1, -1.0);
    rows_value.push_back((l2[k] - l2[k + 1]) * scale);
  }
  for (std::size_t i : {std::size_t{0}, n - 1}) {
    cs.jac.emplace_back(row, iy(i), 1.0);
    rows_value.push_back(c.y[i]);
    ++row;
  }
  // Tangent perpendicular to the axis: one-sided x' vanishes at both ends.
  for (std::size_t i : {std::size_t{0}, n - 1}) {
    const auto s = stencil::at(i, n);
    double v = 0.0;
    for (int k = 0; k < s.count; ++k) {
      cs.jac.emplace_back(row, ix(static_cast<std::size_t>(s.first + k)), s.d1[k] / lbar);
      v += s.d1[k] * c.x[static_cast<std::size_t>(s.first + k)] / lbar;
    }
    rows_value.push_back(v);
    ++row;
  }
  const auto g = constraint_gradients(c, u);
  const ConstraintValues v = constraint_values(c, u);
  const auto add_dense = [&](const NodeGradient& ng, double value, double target, double norm) {
    for (std::size_t i = 0; i < n; ++i) {
      if (ng.dx[i] != 0.0) cs.jac.emplace_back(row, ix(i), ng.dx[i] / norm);
      if (ng.dy[i] != 0.0) cs.jac.emplace_back(row, iy(i), ng.dy[i] / norm);
      if (ng.du[i] != 0.0) cs.jac.emplace_back(row, iu(i), ng.du[i] / norm);
    }
    rows_value.push_back((value - target) / norm);
    return row++;
  };
  const double a0 = st.area_target;
  // constraint_gradients divides the phase entries by the metric weights; undo that here.
  const auto mw = phase_metric_weights(c);
  NodeGradient area = g.area, phase = g.phase_integral;
  for (std::size_t i = 0; i < n; ++i) phase.du[i] *= mw[i];
  cs.area_row = add_dense(area, v.area, st.area_target, a0);
  cs.phase_row = add_dense(phase, v.phase_integral, st.phase_target, a0);
  if (volume) cs.volume_row = add_dense(g.volume, v.volume, st.volume_target, st.volume_target);
  cs.rows = row;
  cs.residual = Eigen::Map<Eigen::VectorXd>(rows_value.data(), static_cast<Eigen::Index>(rows_value.size()));
  return cs;
}

bool constraints_met(const ConstraintSet& cs, std::size_t n, double tol) {
  for (std::size_t r = 0; r < cs.rows; ++r) {
    const double limit = r < n - 2 ? kChordTol : (r < n ? 0.0 : (r < n + 2 ? kChordTol : tol));
    if (std::abs(cs.residual[static_cast<Eigen::Index>(r)]) > limit) return false;
  }
  return true;
}

// Diagonal metric: identity or area weights on the curve, area weights on the phase.
Eigen::VectorXd metric_diagonal(const Curve& c, const FlowConfig& cfg) {
  const std::size_t n = c.size();
  Eigen::VectorXd d(static_cast<Eigen::Index>(3 * n));
  const auto mw = phase_metric_weights(c, cfg.phase_metric_scale);
  const auto sw = phase_metric_weights(c);
  for (std::size_t i = 0; i < n; ++i) {
    const double cw = cfg.curve_metric == CurveMetric::Surface ? sw[i] : 1.0;
    d[ix(i)] = cw;
    d[iy(i)] = cw;
    d[iu(i)] = mw[i];
  }
  return d;
}

// Positive semidefinite approximation of the energy Hessian. The curve block
// bounds the linearized curvature terms isotropically, the phase block holds the
// exact Dirichlet part plus the convex parts of the pointwise terms.
void add_stiffness(std::vector<Triplet>& t, const Curve& c, const PhaseField& u, const MaterialModel& m,
                   const FlowConfig& cfg) {
  const std::size_t n = c.size();
  const auto meas = measures(c);
  const auto curv = curvatures(c);
  const double dt = c.dt();
  const double bend = std::pow(cfg.eps, cfg.bending_exponent);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (c.y[i] <= 0.0) continue;
    const double w = meas.w[i];
    const double xp = (c.x[i + 1] - c.x[i - 1]) / (2.0 * dt), yp = (c.y[i + 1] - c.y[i - 1]) / (2.0 * dt);
    const double q2 = xp * xp + yp * yp;
    const double ui = u[i];
    double helf = m.k(ui);
    if (cfg.variant != Variant::E_eps) helf *= ui * ui;
    const double a = 2.0 * helf + bend;
    // Second differences.
    const double c2 = 2.0 * a * w / (q2 * q2 * dt * dt * dt * dt);
    const std::size_t nb[3] = {i - 1, i, i + 1};
    const double s2[3] = {1.0, -2.0, 1.0};
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) {
        const double v = c2 * s2[p] * s2[q];
        t.emplace_back(ix(nb[p]), ix(nb[q]), v);
        t.emplace_back(iy(nb[p]), iy(nb[q]), v);
      }
    // First differences of x through kappa2 and the y dependence of kappa2.
    const double yi = c.y[i];
    const double c1 = 2.0 * a * w / (yi * yi * q2 * 4.0 * dt * dt);
    const std::size_t nb1[2] = {i - 1, i + 1};
    const double s1[2] = {-1.0, 1.0};
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) t.emplace_back(ix(nb1[p]), ix(nb1[q]), c1 * s1[p] * s1[q]);
    t.emplace_back(iy(i), iy(i), 2.0 * a * w * curv.kappa2[i] * curv.kappa2[i] / (yi * yi));

    // Phase diagonal.
    double dphase = 0.0;
    if (cfg.variant != Variant::E_eps) {
      const double h = curv.H[i] - m.Hs(ui);
      double pointwise = m.k(ui) * h * h;
      if (cfg.variant == Variant::F_eps) pointwise += m.kG(ui) * curv.K[i];
      dphase += std::max(0.0, 2.0 * pointwise) * w;
    }
    dphase += std::max(0.0, m.W.second_derivative(ui)) / cfg.eps * w;
    t.emplace_back(iu(i), iu(i), dphase);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double coef = 2.0 * kPi * cfg.eps * (c.y[k] + c.y[k + 1]) / c.chord(k);
    t.emplace_back(iu(k), iu(k), coef);
    t.emplace_back(iu(k + 1), iu(k + 1), coef);
    t.emplace_back(iu(k), iu(k + 1), -coef);
    t.emplace_back(iu(k + 1), iu(k), -coef);
  }
}

struct Kkt {
  Eigen::SparseLU<SpMat> lu;
  std::size_t dofs = 0;
  std::size_t rows = 0;
};

void factor_kkt(Kkt& k, const Curve& c, const PhaseField& u, const MaterialModel& m, const FlowConfig& cfg,
                const ConstraintSet& cs, double dt) {
  const std::size_t n = c.size();
  k.dofs = 3 * n;
  k.rows = cs.rows;
  std::vector<Triplet> t;
  t.reserve(40 * n + 2 * cs.jac.size());
  const Eigen::VectorXd md = metric_diagonal(c, cfg);
  for (std::size_t d = 0; d < k.dofs; ++d) t.emplace_back(d, d, md[static_cast<Eigen::Index>(d)] / dt);
  if (cfg.semi_implicit) add_stiffness(t, c, u, m, cfg);
  for (const auto& e : cs.jac) {
    t.emplace_back(k.dofs + e.row(), e.col(), e.value());
    t.emplace_back(e.col(), k.dofs + e.row(), e.value());
  }
  const auto size = static_cast<Eigen::Index>(k.dofs + k.rows);
  SpMat a(size, size);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  k.lu.compute(a);
  if (k.lu.info() != Eigen::Success)
    fail(ErrorCode::SingularConstraintSystem, "constraint system could not be factorized");
}

Eigen::VectorXd solve_kkt(Kkt& k, const Eigen::VectorXd& rhs_dofs, const Eigen::VectorXd& rhs_rows) {
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(k.dofs + k.rows));
  rhs << rhs_dofs, rhs_rows;
  Eigen::VectorXd sol = k.lu.solve(rhs);
  if (k.lu.info() != Eigen::Success || !sol.allFinite())
    fail(ErrorCode::SingularConstraintSystem, "constraint system solve failed");
  return sol;
}

void apply(Curve& c, PhaseField& u, const Eigen::VectorXd& d) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    c.x[i] += d[static_cast<Eigen::Index>(ix(i))];
    c.y[i] += d[static_cast<Eigen::Index>(iy(i))];
    u[i] += d[static_cast<Eigen::Index>(iu(i))];
  }
  c.y.front() = 0.0;
  c.y.back() = 0.0;
}

bool admissible(const Curve& c) {
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    if (c.x[i + 1] < c.x[i] || c.y[i] < 0.0 || !std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) return false;
  return true;
}

void refresh_speed(Curve& c) {
  double len = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) len += c.chord(k);
  c.speed = len / c.param_length;
}

// Newton iterations with a frozen factorization.
std::size_t restore(Curve& c, PhaseField& u, const FlowState& st, Kkt& kkt, bool volume, double tol) {
  for (std::size_t it = 0; it < kMaxRestoration; ++it) {
    const ConstraintSet cs = build_constraints(c, u, st, volume);
    if (constraints_met(cs, c.size(), tol)) return it;
    const Eigen::VectorXd sol = solve_kkt(kkt, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kkt.dofs)),
                                          -cs.residual);
    apply(c, u, sol.head(static_cast<Eigen::Index>(kkt.dofs)));
    if (!admissible(c)) fail(ErrorCode::StepRejected, "restoration left the admissible set");
  }
  const ConstraintSet cs = build_constraints(c, u, st, volume);
  if (!constraints_met(cs, c.size(), tol)) fail(ErrorCode::StepRejected, "constraint restoration did not converge");
  return kMaxRestoration;
}

}  // namespace

std::vector<double> phase_metric_weights(const Curve& c, double scale) {
  const std::size_t n = c.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? c.chord(i - 1) : 0.0;
    const double right = i + 1 < n ? c.chord(i) : 0.0;
    w[i] = kPi * c.y[i] * (left + right);
  }
  if (c.y.front() <= 0.0 && n > 1) w.front() = 0.5 * kPi * c.y[1] * c.chord(0);
  if (c.y.back() <= 0.0 && n > 1) w.back() = 0.5 * kPi * c.y[n - 2] * c.chord(n - 2);
  for (auto& v : w) v = std::max(v, std::numeric_limits<double>::min()) * scale;
  return w;
}

DiscreteGradient discrete_gradient(const Curve& c, const PhaseField& u, const MaterialModel& m,
                                   const EnergyOptions& opts, double metric_scale) {
  auto p = energy_partials(c, u, m, opts);
  const auto mw = phase_metric_weights(c, metric_scale);
  for (std::size_t i = 0; i < c.size(); ++i) p.du[i] /= mw[i];
  return {p.energy, std::move(p.dx), std::move(p.dy), std::move(p.du)};
}

ConstraintValues constraint_values(const Curve& c, const PhaseField& u) {
  ConstraintValues v;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    const double l = c.chord(k);
    v.area += kPi * (c.y[k] + c.y[k + 1]) * l;
    v.phase_integral += kPi * l * (c.y[k] * u[k] + c.y[k + 1] * u[k + 1]);
    v.volume += kPi * (c.x[k + 1] - c.x[k]) *
                (c.y[k] * c.y[k] + c.y[k] * c.y[k + 1] + c.y[k + 1] * c.y[k + 1]) / 3.0;
  }
  return v;
}

ConstraintGradients constraint_gradients(const Curve& c, const PhaseField& u, double metric_scale) {
  const std::size_t n = c.size();
  ConstraintGradients g;
  for (NodeGradient* ng : {&g.area, &g.phase_integral, &g.volume}) {
    ng->dx.assign(n, 0.0);
    ng->dy.assign(n, 0.0);
    ng->du.assign(n, 0.0);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dx = c.x[k + 1] - c.x[k], dy = c.y[k + 1] - c.y[k];
    const double l = std::hypot(dx, dy);
    const double lx = dx / l, ly = dy / l;  // d l / d(x_{k+1}, y_{k+1})
    const double ys = c.y[k] + c.y[k + 1];
    g.area.dx[k + 1] += kPi * ys * lx;
    g.area.dx[k] -= kPi * ys * lx;
    g.area.dy[k + 1] += kPi * ys * ly + kPi * l;
    g.area.dy[k] += -kPi * ys * ly + kPi * l;

    const double yu = c.y[k] * u[k] + c.y[k + 1] * u[k + 1];
    g.phase_integral.dx[k + 1] += kPi * yu * lx;
    g.phase_integral.dx[k] -= kPi * yu * lx;
    g.phase_integral.dy[k + 1] += kPi * yu * ly + kPi * l * u[k + 1];
    g.phase_integral.dy[k] += -kPi * yu * ly + kPi * l * u[k];
    g.phase_integral.du[k] += kPi * l * c.y[k];
    g.phase_integral.du[k + 1] += kPi * l * c.y[k + 1];

    const double q = (c.y[k] * c.y[k] + c.y[k] * c.y[k + 1] + c.y[k + 1] * c.y[k + 1]) / 3.0;
    g.volume.dx[k + 1] += kPi * q;
    g.volume.dx[k] -= kPi * q;
    g.volume.dy[k] += kPi * dx * (2.0 * c.y[k] + c.y[k + 1]) / 3.0;
    g.volume.dy[k + 1] += kPi * dx * (c.y[k] + 2.0 * c.y[k + 1]) / 3.0;
  }
  const auto mw = phase_metric_weights(c, metric_scale);
  for (std::size_t i = 0; i < n; ++i) g.phase_integral.du[i] /= mw[i];
  return g;
}

void validate_config(const FlowConfig& cfg) {
  if (!(cfg.eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  if (!(cfg.dt_min > 0.0) || !(cfg.dt_min <= cfg.dt_init) || !(cfg.dt_init <= cfg.dt_max))
    fail(ErrorCode::InvalidArgument, "time steps must satisfy 0 < dt_min <= dt_init <= dt_max");
  if (!(cfg.stationarity_tol > 0.0) || !(cfg.constraint_tol > 0.0))
    fail(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (!(cfg.phase_metric_scale > 0.0)) fail(ErrorCode::InvalidArgument, "phase metric scale must be positive");
  if (!(cfg.grow >= 1.0) || !(cfg.shrink > 0.0 && cfg.shrink < 1.0))
    fail(ErrorCode::InvalidArgument, "step size factors out of range");
}

FlowState make_flow_state(Curve c, PhaseField u, const MaterialModel& m, const FlowConfig& cfg) {
  if (u.size() != c.size()) fail(ErrorCode::InvalidArgument, "phase field and curve sizes differ");
  if (c.size() < 5) fail(ErrorCode::InvalidArgument, "flow needs at least five nodes");
  if (c.y.front() != 0.0 || c.y.back() != 0.0)
    fail(ErrorCode::InvalidArgument, "flow needs a closed membrane with both ends on the axis");
  FlowState st;
  const ConstraintValues v = constraint_values(c, u);
  st.area_target = v.area;
  st.phase_target = v.phase_integral;
  st.volume_target = v.volume;
  st.curve = std::move(c);
  st.phase = std::move(u);
  st.energy = total_energy(st.curve, st.phase, m, energy_options(cfg));
  return st;
}

void restore_constraints(FlowState& st, const MaterialModel& m, const FlowConfig& cfg) {
  validate_config(cfg);
  Curve c = st.curve;
  PhaseField u = st.phase;
  for (int outer = 0; outer < 5; ++outer) {
    const ConstraintSet cs = build_constraints(c, u, st, cfg.fix_volume);
    if (constraints_met(cs, c.size(), cfg.constraint_tol)) break;
    Kkt kkt;
    factor_kkt(kkt, c, u, m, cfg, cs, cfg.dt_init);
    try {
      restore(c, u, st, kkt, cfg.fix_volume, cfg.constraint_tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepRejected || outer == 4) throw;
    }
  }
  refresh_speed(c);
  st.curve = std::move(c);
  st.phase = std::move(u);
  st.energy = total_energy(st.curve, st.phase, m, energy_options(cfg));
}

StepReport project_step(FlowState& st, const MaterialModel& m, const FlowConfig& cfg, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be positive");
  const std::size_t n = st.curve.size();
  const EnergyOptions eo = energy_options(cfg);
  const EnergyGradient g = energy_partials(st.curve, st.phase, m, eo);
  const ConstraintSet cs = build_constraints(st.curve, st.phase, st, cfg.fix_volume);
  Kkt kkt;
  factor_kkt(kkt, st.curve, st.phase, m, cfg, cs, dt);

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(3 * n));
  for (std::size_t i = 0; i < n; ++i) {
    rhs[ix(i)] = -g.dx[i];
    rhs[iy(i)] = -g.dy[i];
    rhs[iu(i)] = -g.du[i];
  }
  const Eigen::VectorXd sol = solve_kkt(kkt, rhs, -cs.residual);
  const auto dofs = static_cast<Eigen::Index>(kkt.dofs);
  const Eigen::VectorXd d = sol.head(dofs);

  StepReport rep;
  rep.energy_before = g.energy.total;
  {
    // Residual gradient -g - J^T lambda in the dual metric.
    const Eigen::VectorXd lam = sol.tail(static_cast<Eigen::Index>(kkt.rows));
    Eigen::VectorXd r = rhs;
    for (const auto& e : cs.jac) r[e.col()] -= e.value() * lam[e.row()];
    const Eigen::VectorXd md = metric_diagonal(st.curve, cfg);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < dofs; ++i) {
      // Pinned axis heights carry no metric.
      if (i == static_cast<Eigen::Index>(iy(0)) || i == static_cast<Eigen::Index>(iy(n - 1))) continue;
      acc += r[i] * r[i] / md[i];
    }
    rep.grad_norm = std::sqrt(acc);
    const double a0 = st.area_target;
    st.lambda_area = -lam[static_cast<Eigen::Index>(cs.area_row)] / a0;
    st.lambda_phase = -lam[static_cast<Eigen::Index>(cs.phase_row)] / a0;
    if (cfg.fix_volume) st.lambda_volume = -lam[static_cast<Eigen::Index>(cs.volume_row)] / st.volume_target;
  }

  Curve c = st.curve;
  PhaseField u = st.phase;
  apply(c, u, d);
  if (!admissible(c)) fail(ErrorCode::StepRejected, "step left the admissible set");
  rep.restoration_iterations = restore(c, u, st, kkt, cfg.fix_volume, cfg.constraint_tol);
  refresh_speed(c);
  EnergyBreakdown e;
  try {
    e = total_energy(c, u, m, eo);
  } catch (const Error& err) {
    fail(ErrorCode::StepRejected, std::string("trial state invalid: ") + err.what());
  }
  if (!std::isfinite(e.total) || e.total > rep.energy_before)
    fail(ErrorCode::StepRejected, "energy increased");
  rep.energy_after = e.total;
  rep.area_residual = e.area - st.area_target;
  rep.phase_residual = e.phase_integral - st.phase_target;
  rep.volume_residual = e.volume - st.volume_target;
  st.curve = std::move(c);
  st.phase = std::move(u);
  st.energy = e;
  st.time += dt;
  ++st.step_count;
  return rep;
}

const char* to_string(CurveMetric m) noexcept { return m == CurveMetric::Nodal ? "nodal" : "surface"; }

CurveMetric parse_curve_metric(const std::string& name) {
  if (name == "nodal") return CurveMetric::Nodal;
  if (name == "surface") return CurveMetric::Surface;
  fail(ErrorCode::InvalidArgument, "unknown curve metric '" + name + "'");
}

const char* to_string(FlowStatus s) noexcept {
  switch (s) {
    case FlowStatus::Stationary: return "stationary";
    case FlowStatus::MaxSteps: return "max_steps";
    case FlowStatus::Stalled: return "stalled";
    case FlowStatus::PinchOff: return "pinch_off";
  }
  return "unknown";
}

double max_angle_derivative(const Curve& c) {
  const auto phi = angle_function(c).phi;
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) worst = std::max(worst, std::abs(phi[k + 1] - phi[k]) / c.chord(k));
  return worst;
}

namespace {

double curve_length(const Curve& c) {
  double l = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) l += c.chord(k);
  return l;
}

bool pinched(const Curve& c, double tol) {
  const double limit = tol * curve_length(c);
  // Interior minima away from the poles.
  for (std::size_t i = 2; i + 2 < c.size(); ++i)
    if (c.y[i] < limit && c.y[i] <= c.y[i - 1] && c.y[i] <= c.y[i + 1]) return true;
  return false;
}

}  // namespace

FlowResult evolve_to_stationary(FlowState state, const MaterialModel& m, const FlowConfig& cfg,
                                const FlowObserver& observer) {
  validate_config(cfg);
  FlowResult res;
  restore_constraints(state, m, cfg);
  double dt = cfg.dt_init;
  const auto record = [&](double grad, double step_dt) {
    TrajectoryRow row;
    row.step = state.step_count;
    row.time = state.time;
    row.dt = step_dt;
    row.energy = state.energy;
    row.grad_norm = grad;
    row.area_residual = state.energy.area - state.area_target;
    row.phase_residual = state.energy.phase_integral - state.phase_target;
    row.max_phi_prime = max_angle_derivative(state.curve);
    res.max_constraint_drift = std::max({res.max_constraint_drift, std::abs(row.area_residual) / state.area_target,
                                         std::abs(row.phase_residual) / state.area_target});
    if (state.step_count % std::max<std::size_t>(1, cfg.log_every) == 0 || step_dt == 0.0) {
      res.trajectory.push_back(row);
      if (observer) observer(row);
    }
  };
  record(std::numeric_limits<double>::quiet_NaN(), 0.0);

  double grad = std::numeric_limits<double>::infinity();
  while (true) {
    if (state.step_count >= cfg.max_steps) {
      res.status = FlowStatus::MaxSteps;
      res.max_steps_exceeded = true;
      break;
    }
    try {
      const StepReport r = project_step(state, m, cfg, dt);
      grad = r.grad_norm;
      record(grad, dt);
      if (grad < cfg.stationarity_tol * std::max(1.0, std::abs(state.energy.total))) {
        res.status = FlowStatus::Stationary;
        break;
      }
      if (pinched(state.curve, cfg.pinch_tol)) {
        res.status = FlowStatus::PinchOff;
        break;
      }
      if (cfg.reparam_interval > 0 && state.step_count % cfg.reparam_interval == 0 &&
          speed_deviation(state.curve) > 1e-8) {
        auto rs = reparametrize_with_field(state.curve, state.phase, state.curve.size());
        state.curve = std::move(rs.curve);
        state.phase = std::move(rs.field);
        restore_constraints(state, m, cfg);
        ++res.reparametrizations;
      }
      dt = std::min(cfg.dt_max, dt * cfg.grow);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepRejected && e.code() != ErrorCode::SingularConstraintSystem) throw;
      ++res.rejected;
      if (dt <= cfg.dt_min) {
        res.status = FlowStatus::Stalled;
        break;
      }
      dt = std::max(cfg.dt_min, dt * cfg.shrink);
    }
  }
  res.final_grad_norm = grad;
  res.state = std::move(state);
  return res;
}

}  // namespace membrane
