#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "membrane/errors.hpp"
#include "membrane/recovery.hpp"
#include "membrane/shapes.hpp"

using namespace membrane;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPiSquared = 19.739208802178717;

const MaterialModel& model() {
  static const MaterialModel m = make_default_model();
  return m;
}

const Profile& quartic_profile() {
  static const Profile p = optimal_profile(model().W);
  return p;
}

}  // namespace

TEST(Profile, MatchesTanh) {
  const auto& p = quartic_profile();
  double worst = 0.0;
  for (double t = -5.0; t <= 5.0; t += 1e-3) worst = std::max(worst, std::abs(p(t) - std::tanh(t)));
  EXPECT_LT(worst, 1e-6);
  EXPECT_EQ(p(0.0), 0.0);
}

TEST(Profile, ResidualBelowTolerance) { EXPECT_LT(quartic_profile().max_residual(model().W), 1e-8); }

TEST(Profile, OddStrictlyIncreasingBounded) {
  const auto& p = quartic_profile();
  double prev = -1.0;
  for (double t = -15.0; t <= 15.0; t += 0.01) {
    const double v = p(t);
    EXPECT_NEAR(v, -p(-t), 1e-12);
    EXPECT_GT(v, prev);
    EXPECT_LT(std::abs(v), 1.0);
    prev = v;
  }
}

TEST(Profile, EnergyApproachesSigma) {
  EXPECT_NEAR(profile_energy(quartic_profile(), model().W, 10.0), 8.0 / 3.0, 0.01 * 8.0 / 3.0);
}

TEST(Profile, AsymmetricWellUsesBothRates) {
  // W(u) = (1 - u^2)^2 (1 + u/2)^2 / 2 vanishes at +-1 with different curvatures.
  auto w = DoubleWell::custom(
      [](double u) { return 0.5 * std::pow((1 - u * u) * (1 + 0.5 * u), 2); },
      [](double u) {
        const double g = (1 - u * u) * (1 + 0.5 * u);
        return g * (-2 * u * (1 + 0.5 * u) + 0.5 * (1 - u * u));
      },
      nullptr);
  const Profile p = optimal_profile(w);
  EXPECT_LT(p.max_residual(w), 1e-8);
  EXPECT_NE(p.rate_plus(), p.rate_minus());
  EXPECT_NEAR(p(40.0), 1.0, 1e-12);
  EXPECT_NEAR(p(-40.0), -1.0, 1e-12);
}

TEST(PEps, Branches) {
  const auto& p = quartic_profile();
  const double eps = 0.01, delta = 0.02;
  EXPECT_EQ(p_eps(p, eps, delta, 0.0), 0.0);
  EXPECT_EQ(p_eps(p, eps, delta, delta), 0.0);
  EXPECT_DOUBLE_EQ(p_eps(p, eps, delta, delta + std::sqrt(eps)), p(1.0 / std::sqrt(eps)));
  EXPECT_EQ(p_eps(p, eps, delta, 1.0), 1.0);
  EXPECT_EQ(p_eps(p, eps, delta, 1.0, -1), -1.0);
  const auto r = recovery_params(p, eps, delta);
  EXPECT_LT(r.delta, r.profile_end);
  EXPECT_LT(r.profile_end, r.cap_end);
  EXPECT_NEAR(p_eps(p, eps, delta, r.cap_end), 1.0, 1e-14);
}

TEST(PEps, Continuous) {
  const auto& p = quartic_profile();
  const double eps = 0.04, delta = 0.03;
  const auto r = recovery_params(p, eps, delta);
  for (double b : {r.delta, r.profile_end, r.cap_end})
    EXPECT_NEAR(p_eps(p, eps, delta, b - 1e-12), p_eps(p, eps, delta, b + 1e-12), 1e-9);
}

TEST(RecoveryParams, DeltaIsExact) {
  EXPECT_DOUBLE_EQ(kink_delta(1.0, 0.01, 2.0), 0.005);
  EXPECT_NEAR(axis_alpha(2.0), 2.7519383938841087, 1e-14);
}

TEST(SmoothKink, TwoLinesPlateauEnergy) {
  const auto mem = shapes::two_lines(kPi / 2, 1.0, 0.5, 201, false, 1);
  const auto r = smooth_kink(mem, 0, 1e-3, model(), {});
  EXPECT_NEAR(r.report.interface_on_plateau, kTwoPiSquared, 0.02 * kTwoPiSquared);
  EXPECT_DOUBLE_EQ(r.report.delta, kPi / 2 * 1e-3 / 2.0);
}

TEST(SmoothKink, YoungEqualityOnFineGrid) {
  const auto mem = shapes::two_lines(kPi / 2, 1.0, 0.5, 201, false, 1);
  KinkOptions o;
  o.window = 0.05;
  o.spacing = 1e-3 / 2560;
  const auto r = smooth_kink(mem, 0, 1e-3, model(), o);
  EXPECT_NEAR(r.report.interface_on_plateau / r.report.identity_value, 1.0, 1e-3);
}

TEST(SmoothKink, GhostInterfaceTotal) {
  const auto mem = shapes::two_lines(kPi / 2, 1.0, 0.5, 201, false, 1);
  const auto r = smooth_kink(mem, 0, 1e-3, model(), {});
  const double expected = 2 * kPi * (model().sigma_hat * kPi / 2 + model().sigma) * 1.0;
  EXPECT_NEAR(r.report.interface_total, expected, 0.03 * expected);
  EXPECT_NEAR(r.report.limit_interface, expected, 1e-9 * expected);
  // Phase dips to 0 on the plateau and returns to +1.
  const auto& u = r.fragment.phase;
  EXPECT_EQ(u.front(), 1.0);
  EXPECT_EQ(u.back(), 1.0);
  EXPECT_EQ(*std::min_element(u.begin(), u.end()), 0.0);
}

TEST(SmoothKink, NoKinkLeavesCurveUnchanged) {
  const auto mem = shapes::two_lines(0.0, 1.0, 0.5, 201, false, 1);
  const auto r = smooth_kink(mem, 0, 1e-3, model(), {0.1, 1e-3});
  EXPECT_EQ(r.report.delta, 0.0);
  for (std::size_t i = 0; i < r.fragment.curve.size(); ++i) {
    EXPECT_NEAR(r.fragment.curve.y[i], 1.0, 1e-12);
    EXPECT_EQ(r.fragment.phase[i], 1.0);
  }
}

TEST(SmoothKink, ConstraintDriftsAreSmall) {
  const auto mem = shapes::two_lines(kPi / 2, 1.0, 0.5, 201, false, 1);
  for (double eps : {4e-3, 1e-3}) {
    const auto r = smooth_kink(mem, 0, eps, model(), {});
    EXPECT_LT(std::abs(r.report.area_drift), 10 * eps);
    EXPECT_LT(std::abs(r.report.phase_drift), 2 * kPi * 2 * std::sqrt(eps));
  }
}

TEST(SmoothKink, EpsTooLarge) {
  const auto mem = shapes::two_lines(kPi / 2, 1.0, 0.05, 21, false, 1);
  try {
    smooth_kink(mem, 0, 0.2, model(), {});
    FAIL() << "expected EpsTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EpsTooLarge);
  }
}

TEST(AxisRecovery, HorizontalEnergy) {
  const auto r = axis_recovery(1e-3, 0.3, 0.2, model());
  EXPECT_NEAR(r.report.limit_on_axis, 3.7699111843077519, 1e-12);
  EXPECT_NEAR(r.report.interface_on_axis, r.report.limit_on_axis, 1e-3 * r.report.limit_on_axis);
  EXPECT_DOUBLE_EQ(r.report.lift, 1e-3);
}

TEST(AxisRecovery, RampBound) {
  for (double eps : {1e-2, 1e-3}) {
    const auto r = axis_recovery(eps, 0.3, 0.3, model());
    EXPECT_LE(r.report.ramp_kappa2, 2 * r.report.ramp_bound);
  }
}

TEST(AxisRecovery, LiftShrinksWithEps) {
  double prev = 1.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto r = axis_recovery(eps, 0.1, 0.2, model());
    double sup = 0.0;
    for (std::size_t i = 0; i < r.fragment.curve.size(); ++i)
      if (r.fragment.arclength[i] >= 0.0 && r.fragment.arclength[i] <= 0.1)
        sup = std::max(sup, r.fragment.curve.y[i]);
    EXPECT_LT(sup, prev);
    prev = sup;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(BuildRecovery, ConstraintsRepaired) {
  const auto mem = shapes::kinked_spheres(1.0, 1025);
  RecoveryOptions o;
  o.spacing = 1e-3;
  const auto r = build_recovery(mem, 0.025, model(), o);
  const double a0 = r.report.limit.area;
  EXPECT_LT(std::abs(r.report.area_residual), 1e-8 * a0);
  EXPECT_LT(std::abs(r.report.phase_residual), 1e-8 * a0);
  EXPECT_EQ(r.report.smoothed_kinks, 1u);
  EXPECT_GT(r.report.x_shift, 0.0);
}

TEST(BuildRecovery, ConvergesAtFirstOrder) {
  RecoveryOptions o;
  o.spacing = 0.025 / 40;
  for (const auto& mem : {shapes::sphere_with_interface(1.0, 2049), shapes::kinked_spheres(1.0, 2049)}) {
    std::vector<double> gaps;
    for (double eps : {0.1, 0.05, 0.025}) gaps.push_back(std::abs(build_recovery(mem, eps, model(), o).report.gap));
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
      const double ratio = gaps[i] / gaps[i + 1];
      EXPECT_GE(ratio, 1.6);
      EXPECT_LE(ratio, 2.4);
    }
  }
}

TEST(BuildRecovery, EnergyDecreasesTowardsLimit) {
  RecoveryOptions o;
  o.spacing = 0.025 / 40;
  const auto mem = shapes::sphere_with_interface(1.0, 2049);
  double prev = 1e300;
  for (double eps : {0.1, 0.05, 0.025}) {
    const double f = build_recovery(mem, eps, model(), o).report.energy.total;
    EXPECT_LE(f, prev * 1.05);
    prev = f;
  }
}

TEST(BuildRecovery, KinksOnAxisAddNothing) {
  // Two touching spheres meet on the axis; the junction has height 0.
  LimitMembrane mem;
  mem.segments.push_back(shapes::arc(0.0, 1.0, 0.0, kPi, 1025, 1));
  mem.segments.push_back(shapes::arc(2.0, 1.0, 0.0, kPi, 1025, 1));
  mem.kinks.push_back({0, 1.0, 0.0, kPi, false});
  RecoveryOptions o;
  o.spacing = 2e-3;
  const auto r = build_recovery(mem, 0.05, model(), o);
  EXPECT_EQ(r.report.smoothed_kinks, 0u);
  EXPECT_EQ(r.report.x_shift, 0.0);
}

TEST(BuildRecovery, AxisPieceIsConstructed) {
  // Two vertical walls joined through the axis.
  LimitMembrane mem;
  Segment left, right;
  left.x = std::vector<double>(101, 0.0);
  left.y.resize(101);
  for (int i = 0; i <= 100; ++i) left.y[i] = 1.0 - i / 100.0;
  right.x = std::vector<double>(101, 0.5);
  right.y.resize(101);
  for (int i = 0; i <= 100; ++i) right.y[i] = i / 100.0;
  left.phase = right.phase = 1;
  mem.segments = {left, right};
  mem.axis_segments.push_back({0.5, 1});
  RecoveryOptions o;
  o.spacing = 1e-3;
  o.repair = false;
  const auto r = build_recovery(mem, 0.01, model(), o);
  EXPECT_EQ(r.report.axis_constructions, 1u);
  EXPECT_NEAR(r.report.x_shift, 4 * axis_alpha(2.0) * 0.01 / kPi, 1e-14);
}
