#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "membrane/errors.hpp"
#include "membrane/flow.hpp"
#include "membrane/shapes.hpp"

using namespace membrane;

namespace {

constexpr double kPi = std::numbers::pi;

MaterialModel sphere_model() {
  auto m = make_default_model();
  m.Hs = ScalarLaw::constant(2.0);
  return m;
}

// Perturbed sphere with a smooth random phase; ends stay on the axis.
std::pair<Curve, PhaseField> random_state(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Curve c = shapes::sphere(n, 1.0, 0.0);
  const double a1 = 0.05 * d(rng), a2 = 0.05 * d(rng);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double t = kPi * static_cast<double>(i) / static_cast<double>(n - 1);
    c.y[i] *= 1.0 + a1 * std::sin(2 * t) + a2 * std::cos(3 * t) * std::sin(t);
  }
  PhaseField u(n);
  const double b1 = d(rng), b2 = d(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = kPi * static_cast<double>(i) / static_cast<double>(n - 1);
    u[i] = 0.8 * std::tanh(3 * (std::cos(t) - 0.3 * b1)) + 0.1 * b2 * std::sin(t);
  }
  return {c, u};
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, worst = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst / std::max(scale, 1e-300);
}

template <class F>
std::vector<double> fd(std::vector<double>& v, F&& f, double h = 1e-6) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double fp = f();
    v[i] = keep - h;
    const double fm = f();
    v[i] = keep;
    out[i] = (fp - fm) / (2 * h);
  }
  return out;
}

}  // namespace

TEST(DiscreteGradient, SphereIsStationaryForMatchingSpontaneousCurvature) {
  const auto m = sphere_model();
  const Curve c = shapes::sphere(512, 1.0, 0.0);
  const PhaseField u(c.size(), 1.0);
  EnergyOptions eo;
  eo.variant = Variant::E_eps;
  const auto g = discrete_gradient(c, u, m, eo);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, std::hypot(g.dx[i], g.dy[i]));
  EXPECT_LT(worst, 1e-3);
}

TEST(DiscreteGradient, MatchesFiniteDifferences) {
  const auto m = make_default_model();
  for (Variant v : {Variant::F_eps, Variant::E_eps, Variant::Fhat_eps}) {
    auto [c, u] = random_state(64, 7);
    EnergyOptions eo;
    eo.variant = v;
    eo.eps = 0.1;
    const auto g = discrete_gradient(c, u, m, eo);
    const auto energy = [&] { return total_energy(c, u, m, eo).total; };
    // Interior heights only: the axis nodes must stay at y = 0.
    std::vector<double> gy(g.dy.begin() + 1, g.dy.end() - 1);
    std::vector<double> fy(c.size() - 2);
    for (std::size_t i = 1; i + 1 < c.size(); ++i) {
      const double keep = c.y[i];
      c.y[i] = keep + 1e-6;
      const double fp = energy();
      c.y[i] = keep - 1e-6;
      const double fm = energy();
      c.y[i] = keep;
      fy[i - 1] = (fp - fm) / 2e-6;
    }
    EXPECT_LT(max_rel_error(gy, fy), 1e-5) << to_string(v);
    const auto fx = fd(c.x, energy);
    EXPECT_LT(max_rel_error(g.dx, fx), 1e-5) << to_string(v);
    const auto fu = fd(u, energy);
    const auto w = phase_metric_weights(c);
    std::vector<double> gu(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) gu[i] = g.du[i] * w[i];
    EXPECT_LT(max_rel_error(gu, fu), 1e-5) << to_string(v);
  }
}

TEST(DiscreteGradient, ZeroPhaseIsCriticalForQuarticWell) {
  const auto m = make_default_model();
  const Curve c = shapes::capped_cylinder(65);
  const PhaseField u(c.size(), 0.0);
  EnergyOptions eo;
  eo.variant = Variant::F_eps;
  const auto g = discrete_gradient(c, u, m, eo);
  for (double v : g.du) EXPECT_EQ(v, 0.0);
}

TEST(DiscreteGradient, MetricScalingActsOnPhaseOnly) {
  const auto m = make_default_model();
  auto [c, u] = random_state(64, 3);
  EnergyOptions eo;
  const auto a = discrete_gradient(c, u, m, eo, 1.0);
  const auto b = discrete_gradient(c, u, m, eo, 4.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(a.dx[i], b.dx[i]);
    EXPECT_EQ(a.dy[i], b.dy[i]);
    EXPECT_NEAR(b.du[i], a.du[i] / 4.0, 1e-12 * std::abs(a.du[i]) + 1e-300);
  }
}

TEST(ConstraintGradients, MatchFiniteDifferences) {
  auto [c, u] = random_state(64, 11);
  const auto g = constraint_gradients(c, u);
  const auto w = phase_metric_weights(c);
  const auto check = [&](const NodeGradient& ng, auto value) {
    const auto fx = fd(c.x, [&] { return value(constraint_values(c, u)); });
    const auto fy = fd(c.y, [&] { return value(constraint_values(c, u)); });
    const auto fu = fd(u, [&] { return value(constraint_values(c, u)); });
    std::vector<double> gu(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) gu[i] = ng.du[i] * w[i];
    EXPECT_LT(max_rel_error(ng.dx, fx), 1e-5);
    EXPECT_LT(max_rel_error(ng.dy, fy), 1e-5);
    if (std::any_of(fu.begin(), fu.end(), [](double v) { return v != 0.0; })) EXPECT_LT(max_rel_error(gu, fu), 1e-5);
  };
  check(g.area, [](const ConstraintValues& v) { return v.area; });
  check(g.phase_integral, [](const ConstraintValues& v) { return v.phase_integral; });
  check(g.volume, [](const ConstraintValues& v) { return v.volume; });
}

TEST(ConstraintGradients, PhaseIntegralIsOneInMetric) {
  auto [c, u] = random_state(64, 5);
  const auto g = constraint_gradients(c, u);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) EXPECT_NEAR(g.phase_integral.du[i], 1.0, 1e-14);
}

TEST(ConstraintGradients, AreaGradientIsNormalOnSphere) {
  const Curve c = shapes::sphere(257, 1.0, 0.0);
  const PhaseField u(c.size(), 1.0);
  const auto g = constraint_gradients(c, u);
  const auto meas = measures(c);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    // Outward normal of the unit sphere is the position itself; |grad A| = H w = 2 w.
    const double dot = g.area.dx[i] * c.x[i] + g.area.dy[i] * c.y[i];
    EXPECT_NEAR(dot / std::hypot(g.area.dx[i], g.area.dy[i]), 1.0, 1e-3);
    EXPECT_NEAR(std::hypot(g.area.dx[i], g.area.dy[i]), 2.0 * meas.w[i], 2e-3 * meas.w[i]);
  }
}

TEST(ProjectStep, SphereStaysPut) {
  const auto m = sphere_model();
  FlowConfig cfg;
  cfg.variant = Variant::E_eps;
  auto st = make_flow_state(shapes::sphere(257, 1.0, 0.0), PhaseField(257, 1.0), m, cfg);
  restore_constraints(st, m, cfg);
  const Curve before = st.curve;
  project_step(st, m, cfg, 1e-3);
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_NEAR(st.curve.x[i], before.x[i], 1e-6);
    EXPECT_NEAR(st.curve.y[i], before.y[i], 1e-6);
  }
}

TEST(ProjectStep, ConservesConstraintsAndDecreasesEnergy) {
  const auto m = make_default_model();
  FlowConfig cfg;
  auto c = shapes::capped_cylinder(129);
  auto st = make_flow_state(c, shapes::capped_cylinder_phase(c), m, cfg);
  restore_constraints(st, m, cfg);
  double dt = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const double e0 = st.energy.total;
    try {
      const auto r = project_step(st, m, cfg, dt);
      EXPECT_LE(r.energy_after, e0 + 1e-12 * std::abs(e0));
      EXPECT_LT(std::abs(r.area_residual), 1e-8 * st.area_target);
      EXPECT_LT(std::abs(r.phase_residual), 1e-8 * st.area_target);
      dt *= 1.5;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::StepRejected);
      EXPECT_EQ(st.energy.total, e0);
      dt *= 0.5;
    }
  }
  EXPECT_GT(st.step_count, 10u);
}

TEST(ProjectStep, KeepsAxisEndsAndEqualChords) {
  const auto m = make_default_model();
  FlowConfig cfg;
  auto c = shapes::capped_cylinder(129);
  auto st = make_flow_state(c, shapes::capped_cylinder_phase(c), m, cfg);
  restore_constraints(st, m, cfg);
  project_step(st, m, cfg, 1e-5);
  EXPECT_EQ(st.curve.y.front(), 0.0);
  EXPECT_EQ(st.curve.y.back(), 0.0);
  EXPECT_LT(speed_deviation(st.curve), 1e-8);
}

TEST(Evolve, LyapunovAndConservation) {
  const auto m = make_default_model();
  FlowConfig cfg;
  cfg.variant = Variant::E_eps;
  cfg.max_steps = 150;
  auto c = shapes::capped_cylinder(129);
  const auto res = evolve_to_stationary(make_flow_state(c, shapes::capped_cylinder_phase(c), m, cfg), m, cfg);
  ASSERT_GT(res.trajectory.size(), 2u);
  for (std::size_t k = 1; k < res.trajectory.size(); ++k) {
    const double prev = res.trajectory[k - 1].energy.total;
    EXPECT_LE(res.trajectory[k].energy.total, prev + 1e-12 * std::abs(prev));
  }
  EXPECT_LE(res.max_constraint_drift, 1e-6);
  EXPECT_LT(res.trajectory.back().energy.total, res.trajectory.front().energy.total);
}

TEST(Evolve, MaxStepsIsFlagged) {
  const auto m = make_default_model();
  FlowConfig cfg;
  cfg.max_steps = 3;
  auto c = shapes::capped_cylinder(65);
  const auto res = evolve_to_stationary(make_flow_state(c, shapes::capped_cylinder_phase(c), m, cfg), m, cfg);
  EXPECT_EQ(res.status, FlowStatus::MaxSteps);
  EXPECT_TRUE(res.max_steps_exceeded);
  EXPECT_EQ(res.state.step_count, 3u);
}

TEST(Evolve, PinchOffIsReported) {
  const auto m = make_default_model();
  FlowConfig cfg;
  cfg.pinch_tol = 0.2;  // every interior minimum below 0.2 L counts
  auto c = shapes::capped_cylinder(65);
  const auto res = evolve_to_stationary(make_flow_state(c, shapes::capped_cylinder_phase(c), m, cfg), m, cfg);
  EXPECT_EQ(res.status, FlowStatus::PinchOff);
}

TEST(Evolve, SphereStaysSpherical) {
  const auto m = sphere_model();
  FlowConfig cfg;
  cfg.variant = Variant::E_eps;
  const auto res = evolve_to_stationary(make_flow_state(shapes::sphere(129, 1.0, 0.0), PhaseField(129, 1.0), m, cfg),
                                        m, cfg);
  EXPECT_EQ(res.status, FlowStatus::Stationary);
  for (std::size_t i = 0; i < res.state.curve.size(); ++i)
    EXPECT_NEAR(std::hypot(res.state.curve.x[i], res.state.curve.y[i]), 1.0, 1e-3);
}

TEST(FlowConfig, Validation) {
  FlowConfig cfg;
  cfg.dt_min = 1.0;
  cfg.dt_init = 0.1;
  EXPECT_THROW(validate_config(cfg), Error);
  cfg = FlowConfig{};
  cfg.eps = 0.0;
  EXPECT_THROW(validate_config(cfg), Error);
  EXPECT_NO_THROW(validate_config(FlowConfig{}));
  EXPECT_EQ(parse_curve_metric("surface"), CurveMetric::Surface);
  EXPECT_THROW(parse_curve_metric("riemann"), Error);
}

TEST(FlowState, RequiresClosedMembrane) {
  const auto m = make_default_model();
  const Curve c = shapes::cylinder(33, 0.5, 1.0);
  EXPECT_THROW(make_flow_state(c, PhaseField(33, 1.0), m, FlowConfig{}), Error);
}
