#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "membrane/errors.hpp"
#include "membrane/materials.hpp"

using namespace membrane;

TEST(DefaultModel, SpontaneousCurvatureInterpolation) {
  const auto m = make_default_model();
  EXPECT_NEAR(m.Hs(1.0), 2.0, 1e-12);
  EXPECT_NEAR(m.Hs(-1.0), 1.0, 1e-12);
  EXPECT_NEAR(m.Hs(0.0), 1.5, 1e-12);
  EXPECT_NEAR(m.Hs.df(0.0), 0.9375, 1e-12);
  EXPECT_NEAR(m.Hs.df(1.0), 0.0, 1e-12);
  EXPECT_NEAR(m.Hs.df(-1.0), 0.0, 1e-12);
  EXPECT_EQ(m.Hs(3.0), 2.0);
  EXPECT_EQ(m.Hs(-3.0), 1.0);
}

TEST(DefaultModel, QuarticWellValues) {
  const auto m = make_default_model();
  EXPECT_EQ(m.W(0.0), 1.0);
  EXPECT_EQ(m.W(1.0), 0.0);
  EXPECT_EQ(m.W(-1.0), 0.0);
  EXPECT_EQ(m.C0, 10.0);
}

TEST(SigmaConstants, QuarticWell) {
  const auto s = sigma_constants(DoubleWell::quartic());
  EXPECT_NEAR(s.sigma, 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.sigma_hat, 2.0, 1e-12);
}

TEST(SigmaConstants, ScalingByFourDoubles) {
  const auto s = sigma_constants(DoubleWell::quartic(4.0));
  EXPECT_NEAR(s.sigma, 16.0 / 3.0, 1e-10);
  EXPECT_NEAR(s.sigma_hat, 4.0, 1e-12);
}

TEST(SigmaConstants, TabulatedWellMatchesQuartic) {
  std::vector<double> u, w;
  for (int i = 0; i <= 400; ++i) {
    const double x = -1.0 + 2.0 * i / 400.0;
    u.push_back(x);
    w.push_back((1 - x * x) * (1 - x * x));
  }
  const auto s = sigma_constants(DoubleWell::tabulated(u, w));
  EXPECT_NEAR(s.sigma, 8.0 / 3.0, 1e-6);
}

TEST(SplitSigma, SymmetricQuartic) {
  const auto s = split_sigma(DoubleWell::quartic());
  EXPECT_NEAR(s.sigma_plus, 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.sigma_minus, 4.0 / 3.0, 1e-12);
}

TEST(SplitSigma, AsymmetricWell) {
  const auto w = DoubleWell::custom(
      [](double u) { return (1 - u * u) * (1 - u * u) * (2 - u) / 2; },
      [](double u) { return -2 * u * (1 - u * u) * (2 - u) - (1 - u * u) * (1 - u * u) / 2; });
  const auto s = split_sigma(w);
  EXPECT_NEAR(s.sigma_plus, 1.1983178713415509, 1e-8);
  EXPECT_NEAR(s.sigma_minus, 1.4510786807656078, 1e-8);
  EXPECT_LT(s.sigma_plus, s.sigma_minus);
  EXPECT_NEAR(s.sigma_plus + s.sigma_minus, sigma_constants(w).sigma, 1e-8);
}

TEST(SplitSigma, OneSidedWellIsRejected) {
  const auto w = DoubleWell::custom([](double u) { return (1 - u) * (1 - u); },
                                    [](double u) { return -2 * (1 - u); });
  try {
    split_sigma(w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonvanishingWell);
  }
}

TEST(Rigidities, DefaultModelPasses) {
  const auto r = validate_rigidities(make_default_model());
  EXPECT_TRUE(r.all_pass());
  EXPECT_NEAR(r.delta_max, 0.5, 1e-12);
  EXPECT_NEAR(r.bound_constant, 4.0, 1e-12);
}

TEST(Rigidities, StrongGaussRigidityFails) {
  auto m = make_default_model();
  m.kG = ScalarLaw::constant(-3.0);
  const auto r = validate_rigidities(m);
  EXPECT_FALSE(r.combination_positive);
  EXPECT_NEAR(r.inf_combination, -0.5, 1e-12);
}

TEST(Rigidities, MarginOfOneTenth) {
  auto m = make_default_model();
  m.k = ScalarLaw::constant(0.6);
  const auto r = validate_rigidities(m);
  EXPECT_TRUE(r.all_pass());
  EXPECT_NEAR(r.inf_combination, 0.1, 1e-12);
}

TEST(MaterialProperties, PointwiseHelfrichLowerBound) {
  const auto m = make_default_model();
  const auto r = validate_rigidities(m);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> du(-m.C0, m.C0), dk(-50.0, 50.0);
  for (int s = 0; s < 100000; ++s) {
    const double u = du(rng), k1 = dk(rng), k2 = dk(rng);
    const double H = k1 + k2, K = k1 * k2, dev = H - m.Hs(u);
    const double val = u * u * m.k(u) * dev * dev + u * u * m.kG(u) * K;
    ASSERT_GE(val, -r.bound_constant * m.C0 * m.C0 - 1e-9);
    ASSERT_GE(val, -helfrich_pointwise_bound(m, u) * u * u - 1e-9 * (1 + std::abs(val)));
  }
}

TEST(MaterialProperties, SigmaInvariantUnderReflection) {
  const auto w = DoubleWell::quartic();
  const auto reflected = DoubleWell::custom([](double u) { return (1 - u * u) * (1 - u * u); },
                                            [](double u) { return -4 * u * (1 - u * u); });
  EXPECT_NEAR(sigma_constants(w).sigma, sigma_constants(reflected).sigma, 1e-14);
  const auto s = split_sigma(w);
  EXPECT_NEAR(s.sigma_plus, s.sigma_minus, 1e-14);
}
