#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace membrane {

// Scalar law u -> f(u) together with its derivative.
struct ScalarLaw {
  std::function<double(double)> f;
  std::function<double(double)> df;

  double operator()(double u) const { return f(u); }

  static ScalarLaw constant(double c);
};

class DoubleWell {
 public:
  enum class Kind { Quartic, Tabulated, Custom };

  static DoubleWell quartic(double scale = 1.0);
  // Cubic spline through the samples, clamped to be nonnegative.
  static DoubleWell tabulated(std::vector<double> u, std::vector<double> w);
  static DoubleWell custom(std::function<double(double)> w, std::function<double(double)> dw,
                           std::function<double(double)> d2w = {});

  double operator()(double u) const { return w_(u); }
  double derivative(double u) const { return dw_(u); }
  // Second derivative; central differences of W' when no closed form was given.
  double second_derivative(double u) const;

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  const std::vector<double>& table_u() const { return table_u_; }
  const std::vector<double>& table_w() const { return table_w_; }

 private:
  Kind kind_ = Kind::Quartic;
  double scale_ = 1.0;
  std::vector<double> table_u_, table_w_;
  std::function<double(double)> w_, dw_, d2w_;
};

struct SigmaConstants {
  double sigma = 0.0;
  double sigma_hat = 0.0;
};

struct SplitSigma {
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;
};

SigmaConstants sigma_constants(const DoubleWell& w);
SplitSigma split_sigma(const DoubleWell& w);

// Quintic Hermite interpolation of the spontaneous curvature between
// h_minus at u = -1 and h_plus at u = +1, constant outside [-1, 1].
ScalarLaw quintic_spontaneous_curvature(double h_minus = 1.0, double h_plus = 2.0);

struct MaterialModel {
  DoubleWell W = DoubleWell::quartic();
  ScalarLaw Hs;
  ScalarLaw k;
  ScalarLaw kG;
  double C0 = 10.0;
  double sigma = 0.0;
  double sigma_hat = 0.0;
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;

  // Recomputes the line-tension constants from W.
  void refresh_constants();
};

MaterialModel make_default_model();

struct RigidityReport {
  bool k_positive = false;
  bool kG_negative = false;
  bool combination_positive = false;
  double inf_k = 0.0;
  double sup_kG = 0.0;
  double inf_combination = 0.0;  // inf (k + kG/2)
  double delta_max = 0.0;        // sup of admissible delta with (1 - delta) k >= -kG/2
  double bound_constant = 0.0;   // (1 - delta)/delta * sup k Hs^2 at delta_max
  double sup_Hs = 0.0;

  bool all_pass() const { return k_positive && kG_negative && combination_positive; }
};

RigidityReport validate_rigidities(const MaterialModel& m, std::size_t samples = 10000);

// Pointwise lower bound c(u) >= 0 with u^2 k (H - Hs)^2 + u^2 kG K >= -c(u) u^2.
double helfrich_pointwise_bound(const MaterialModel& m, double u);

}  // namespace membrane
