#include "membrane/materials.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <memory>

#include "membrane/errors.hpp"
#include "membrane/spline.hpp"

namespace membrane {

ScalarLaw ScalarLaw::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

DoubleWell DoubleWell::quartic(double scale) {
  DoubleWell w;
  w.kind_ = Kind::Quartic;
  w.scale_ = scale;
  w.w_ = [scale](double u) {
    const double a = 1.0 - u * u;
    return scale * a * a;
  };
  w.dw_ = [scale](double u) { return -4.0 * scale * u * (1.0 - u * u); };
  w.d2w_ = [scale](double u) { return scale * (12.0 * u * u - 4.0); };
  return w;
}

DoubleWell DoubleWell::tabulated(std::vector<double> u, std::vector<double> values) {
  DoubleWell w;
  w.kind_ = Kind::Tabulated;
  w.table_u_ = u;
  w.table_w_ = values;
  auto spline = std::make_shared<CubicSpline>(std::move(u), std::move(values));
  w.w_ = [spline](double x) { return std::max(0.0, (*spline)(x)); };
  w.dw_ = [spline](double x) { return (*spline)(x) > 0.0 ? spline->derivative(x) : 0.0; };
  w.d2w_ = [spline](double x) { return spline->second_derivative(x); };
  return w;
}

DoubleWell DoubleWell::custom(std::function<double(double)> f, std::function<double(double)> df,
                              std::function<double(double)> d2f) {
  DoubleWell w;
  w.kind_ = Kind::Custom;
  w.w_ = std::move(f);
  w.dw_ = std::move(df);
  w.d2w_ = std::move(d2f);
  return w;
}

double DoubleWell::second_derivative(double u) const {
  if (d2w_) return d2w_(u);
  const double h = 1e-5;
  return (dw_(u + h) - dw_(u - h)) / (2.0 * h);
}

namespace {

void require_vanishing(const DoubleWell& w) {
  if (w(1.0) > 1e-12 || w(-1.0) > 1e-12)
    fail(ErrorCode::NonvanishingWell, "double well must vanish at u = -1 and u = +1");
}

double line_tension(const DoubleWell& w, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [&w](double u) { return 2.0 * std::sqrt(std::max(0.0, w(u))); };
  double err = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14, &err);
}

}  // namespace

SigmaConstants sigma_constants(const DoubleWell& w) {
  require_vanishing(w);
  SigmaConstants s;
  s.sigma = line_tension(w, -1.0, 0.0) + line_tension(w, 0.0, 1.0);
  s.sigma_hat = 2.0 * std::sqrt(w(0.0));
  return s;
}

SplitSigma split_sigma(const DoubleWell& w) {
  require_vanishing(w);
  return {line_tension(w, 0.0, 1.0), line_tension(w, -1.0, 0.0)};
}

ScalarLaw quintic_spontaneous_curvature(double h_minus, double h_plus) {
  const double mid = 0.5 * (h_minus + h_plus), half = 0.5 * (h_plus - h_minus);
  ScalarLaw law;
  law.f = [mid, half](double u) {
    if (u <= -1.0) return mid - half;
    if (u >= 1.0) return mid + half;
    const double u2 = u * u;
    return mid + half * u * (15.0 - 10.0 * u2 + 3.0 * u2 * u2) / 8.0;
  };
  law.df = [half](double u) {
    if (u <= -1.0 || u >= 1.0) return 0.0;
    const double a = 1.0 - u * u;
    return half * 15.0 * a * a / 8.0;
  };
  return law;
}

void MaterialModel::refresh_constants() {
  const auto s = sigma_constants(W);
  const auto split = split_sigma(W);
  sigma = s.sigma;
  sigma_hat = s.sigma_hat;
  sigma_plus = split.sigma_plus;
  sigma_minus = split.sigma_minus;
}

MaterialModel make_default_model() {
  MaterialModel m;
  m.W = DoubleWell::quartic();
  m.Hs = quintic_spontaneous_curvature(1.0, 2.0);
  m.k = ScalarLaw::constant(1.0);
  m.kG = ScalarLaw::constant(-1.0);
  m.C0 = 10.0;
  m.refresh_constants();
  return m;
}

RigidityReport validate_rigidities(const MaterialModel& m, std::size_t samples) {
  RigidityReport r;
  r.inf_k = std::numeric_limits<double>::infinity();
  r.sup_kG = -std::numeric_limits<double>::infinity();
  r.inf_combination = std::numeric_limits<double>::infinity();
  r.delta_max = std::numeric_limits<double>::infinity();
  double sup_kHs2 = 0.0;
  const std::size_t n = std::max<std::size_t>(samples, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = -m.C0 + 2.0 * m.C0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double k = m.k(u), kG = m.kG(u), hs = m.Hs(u);
    r.inf_k = std::min(r.inf_k, k);
    r.sup_kG = std::max(r.sup_kG, kG);
    r.inf_combination = std::min(r.inf_combination, k + 0.5 * kG);
    if (k > 0.0) r.delta_max = std::min(r.delta_max, 1.0 + kG / (2.0 * k));
    sup_kHs2 = std::max(sup_kHs2, k * hs * hs);
    r.sup_Hs = std::max(r.sup_Hs, std::abs(hs));
  }
  r.k_positive = r.inf_k > 0.0;
  r.kG_negative = r.sup_kG < 0.0;
  r.combination_positive = r.inf_combination > 0.0;
  r.delta_max = std::min(r.delta_max, 1.0);
  r.bound_constant = r.delta_max > 0.0 ? (1.0 - r.delta_max) / r.delta_max * sup_kHs2
                                       : std::numeric_limits<double>::infinity();
  return r;
}

double helfrich_pointwise_bound(const MaterialModel& m, double u) {
  const double k = m.k(u), kG = m.kG(u), hs = m.Hs(u);
  const double denom = 2.0 * k + kG;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return k * std::abs(kG) * hs * hs / denom;
}

}  // namespace membrane
