#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "membrane/energy.hpp"
#include "membrane/shapes.hpp"

using namespace membrane;

namespace {

constexpr double kPi = std::numbers::pi;

MaterialModel zero_hs_model() {
  auto m = make_default_model();
  m.Hs = ScalarLaw::constant(0.0);
  return m;
}

PhaseField constant(const Curve& c, double v) { return PhaseField(c.size(), v); }

}  // namespace

TEST(HelfrichEps, SphereWithoutSpontaneousCurvature) {
  const Curve c = shapes::sphere(513);
  EXPECT_NEAR(helfrich_eps(c, constant(c, 1.0), zero_hs_model()), 12 * kPi, 0.01 * 12 * kPi);
}

TEST(HelfrichEps, VanishesForZeroPhase) {
  const Curve c = shapes::capped_cylinder(257);
  EXPECT_EQ(helfrich_eps(c, constant(c, 0.0), make_default_model()), 0.0);
}

TEST(HelfrichEps, SphereMatchingSpontaneousCurvature) {
  const Curve c = shapes::sphere(513);
  EXPECT_NEAR(helfrich_eps(c, constant(c, 1.0), make_default_model()), -4 * kPi, 0.01 * 4 * kPi);
}

TEST(InterfaceEps, SphereBendingTerm) {
  const Curve c = shapes::sphere(513);
  const double eps = 0.05;
  EXPECT_NEAR(interface_eps(c, constant(c, 1.0), make_default_model(), eps), 8 * kPi * eps,
              0.01 * 8 * kPi * eps);
}

TEST(InterfaceEps, CylinderAtZeroPhase) {
  const double r = 0.5, l = 2.0, eps = 0.1;
  const Curve c = shapes::cylinder(201, r, l);
  const double expected = 2 * kPi * r * l / eps + eps * 2 * kPi * l / r;
  EXPECT_NEAR(interface_eps(c, constant(c, 0.0), make_default_model(), eps), expected, 0.01 * expected);
}

TEST(InterfaceEps, TanhProfileApproachesLineTension) {
  const double eps = 1e-3, y0 = 1.0, half = 0.05;
  const std::size_t n = 4001;
  const Curve c = shapes::cylinder(n, y0, 2 * half, -half);
  PhaseField u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::tanh(c.x[i] / eps);
  EnergyOptions o;
  o.eps = eps;
  const auto e = total_energy(c, u, make_default_model(), o);
  const double mm = e.interface_gradient + e.interface_well;
  const double limit = 16.755160819145564;  // 2 pi y0 sigma
  EXPECT_NEAR(mm, limit, 0.02 * limit);
}

TEST(TotalEnergy, VariantsOnUnitSphere) {
  const Curve c = shapes::sphere(513);
  const auto m = make_default_model();
  const double eps = 0.05;
  const auto f = total_energy(c, constant(c, 1.0), m, eps, Variant::F_eps);
  const auto e = total_energy(c, constant(c, 1.0), m, eps, Variant::E_eps);
  const auto h = total_energy(c, constant(c, 1.0), m, eps, Variant::Fhat_eps);
  EXPECT_NEAR(f.total, -4 * kPi + 0.4 * kPi, 0.01 * 3.6 * kPi);
  EXPECT_NEAR(e.total, -4 * kPi, 0.01 * 4 * kPi);
  EXPECT_NEAR(h.total, 0.4 * kPi, 0.01 * 0.4 * kPi);
}

TEST(TotalEnergy, BreakdownSumsExactly) {
  const Curve c = shapes::capped_cylinder(257);
  const auto u = shapes::capped_cylinder_phase(c);
  for (auto v : {Variant::F_eps, Variant::E_eps, Variant::Fhat_eps}) {
    const auto e = total_energy(c, u, make_default_model(), 0.05, v);
    EXPECT_EQ(e.total, e.helfrich + e.interface_gradient + e.interface_well + e.interface_bending);
  }
}

TEST(TotalEnergy, CappedCylinderConstraints) {
  const Curve c = shapes::capped_cylinder(2049);
  const auto e = total_energy(c, shapes::capped_cylinder_phase(c), make_default_model(), 0.05, Variant::F_eps);
  EXPECT_NEAR(e.area, 12.566370614359173, 1e-4);
  EXPECT_NEAR(e.phase_integral, 3.1415926535897932, 1e-3);
}

TEST(TotalEnergy, IndexRangesSplitAdditively) {
  const Curve c = shapes::capped_cylinder(257);
  const auto u = shapes::capped_cylinder_phase(c);
  const auto m = make_default_model();
  EnergyOptions all, left, right;
  left.last = 100;
  right.first = 100;
  const double whole = total_energy(c, u, m, all).total;
  const double parts = total_energy(c, u, m, left).total + total_energy(c, u, m, right).total;
  EXPECT_NEAR(whole, parts, 1e-10 * std::abs(whole));
}

TEST(EnergyPartials, MatchCentralDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  Curve c = shapes::sphere(33);
  PhaseField u(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    u[i] = 0.8 * noise(rng);
    if (i > 0 && i + 1 < c.size()) {
      c.x[i] += 0.01 * noise(rng);
      c.y[i] += 0.01 * noise(rng);
    }
  }
  const auto m = make_default_model();
  for (auto v : {Variant::F_eps, Variant::E_eps, Variant::Fhat_eps}) {
    EnergyOptions o;
    o.variant = v;
    o.eps = 0.1;
    const auto g = energy_partials(c, u, m, o);
    EXPECT_NEAR(g.energy.total, total_energy(c, u, m, o).total, 1e-12 * std::abs(g.energy.total));
    const double h = 1e-6;
    for (std::size_t i = 1; i + 1 < c.size(); ++i) {
      Curve cp = c, cm = c;
      cp.x[i] += h;
      cm.x[i] -= h;
      const double fx = (total_energy(cp, u, m, o).total - total_energy(cm, u, m, o).total) / (2 * h);
      EXPECT_NEAR(g.dx[i], fx, 1e-5 * (1 + std::abs(fx)));
      cp = c;
      cm = c;
      cp.y[i] += h;
      cm.y[i] -= h;
      const double fy = (total_energy(cp, u, m, o).total - total_energy(cm, u, m, o).total) / (2 * h);
      EXPECT_NEAR(g.dy[i], fy, 1e-5 * (1 + std::abs(fy)));
      PhaseField up = u, um = u;
      up[i] += h;
      um[i] -= h;
      const double fu = (total_energy(c, up, m, o).total - total_energy(c, um, m, o).total) / (2 * h);
      EXPECT_NEAR(g.du[i], fu, 1e-5 * (1 + std::abs(fu)));
    }
  }
}

TEST(FirstVariation, UnitSphere) {
  const Curve c = shapes::sphere(1025);
  const auto r = first_variation_bound_check(c, constant(c, 1.0), make_default_model(), 0.05);
  EXPECT_NEAR(r.integral_abs_H, 8 * kPi, 0.01 * 8 * kPi);
  EXPECT_NEAR(r.two_pi_length, 2 * kPi * kPi, 1e-3);
  EXPECT_TRUE(r.length_bound);
  EXPECT_TRUE(r.bending_positivity);
  EXPECT_GT(r.ratio, 0.0);
}

TEST(FirstVariation, ZeroPhaseIsPositive) {
  const Curve c = shapes::capped_cylinder(257);
  const auto r = first_variation_bound_check(c, constant(c, 0.0), make_default_model(), 0.05);
  EXPECT_EQ(r.helfrich, 0.0);
  EXPECT_TRUE(r.bending_positivity);
}

TEST(EnergyProperties, WellTermBlowsUpAsEpsShrinks) {
  const Curve c = shapes::capped_cylinder(513);
  const auto u = shapes::capped_cylinder_phase(c);
  const auto m = make_default_model();
  double prev = 0.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const double v = interface_eps(c, u, m, eps);
    EXPECT_GT(v, prev);
    prev = v;
  }
}
