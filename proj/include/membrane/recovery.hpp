#pragma once

#include <cstddef>
#include <vector>

#include "membrane/energy.hpp"
#include "membrane/geometry.hpp"
#include "membrane/limit.hpp"
#include "membrane/materials.hpp"
#include "membrane/spline.hpp"

namespace membrane {

// Heteroclinic solution of p' = sqrt(W(p)), p(0) = 0, defined on the whole line.
class Profile {
 public:
  Profile() = default;

  double operator()(double t) const;
  double derivative(double t) const;

  double window() const { return T_; }
  // Decay rates towards +1 and -1.
  double rate_plus() const { return rate_plus_; }
  double rate_minus() const { return rate_minus_; }
  // Largest |p' - sqrt(W(p))| over the stored samples and midpoints.
  double max_residual(const DoubleWell& w) const;

  friend Profile optimal_profile(const DoubleWell& w, double T);

 private:
  double T_ = 0.0;
  double t_lo_ = 0.0, t_hi_ = 0.0, p_lo_ = 0.0, p_hi_ = 0.0;
  double rate_plus_ = 0.0, rate_minus_ = 0.0;
  HermiteSpline samples_;
};

Profile optimal_profile(const DoubleWell& w, double T = 10.0);

// int_{-T}^{T} p'^2 + W(p) dt.
double profile_energy(const Profile& p, const DoubleWell& w, double T);

struct RecoveryParams {
  double eps = 0.0;
  double delta = 0.0;  // plateau half width
  double profile_end = 0.0;  // delta + sqrt(eps)
  double cap_end = 0.0;      // end of the linear connection to +-1
};

RecoveryParams recovery_params(const Profile& p, double eps, double delta, int sign = 1);

// Plateau at 0 on [0, delta], scaled profile on a sqrt(eps) window, linear cap,
// then sign (+1 or -1). Negative t are mapped to the plateau.
double p_eps(const Profile& p, double eps, double delta, double t, int sign = 1);

// Plateau half width for a kink with the given jump angle.
double kink_delta(double jump_angle, double eps, double sigma_hat);

// Constant alpha of the axis construction.
double axis_alpha(double sigma_hat);

struct Fragment {
  Curve curve;
  PhaseField phase;
  std::vector<double> arclength;  // limit-curve arclength of each node relative to the feature
};

struct KinkReport {
  double delta = 0.0;
  double window = 0.0;  // half width a of J
  double x_shift = 0.0;
  double y_correction = 0.0;
  double interface_on_plateau = 0.0;  // I_eps over J_eps
  double interface_total = 0.0;       // I_eps over J
  double helfrich_total = 0.0;
  double limit_interface = 0.0;       // 2 pi (line tension + sigma_hat * jump) y
  double area_drift = 0.0;
  double phase_drift = 0.0;
  double identity_value = 0.0;  // plateau energy predicted by the two-lines identity
};

struct KinkRecovery {
  Fragment fragment;
  KinkReport report;
};

struct KinkOptions {
  double window = 0.0;   // half width of J; 0 picks half the shorter neighbour
  double spacing = 0.0;  // node spacing; 0 picks delta/200 capped by eps/200
};

KinkRecovery smooth_kink(const LimitMembrane& mem, std::size_t kink_index, double eps,
                         const MaterialModel& m, const KinkOptions& opts = {});

struct AxisReport {
  double alpha = 0.0;
  double lift = 0.0;                  // 2 eps / sigma_hat
  double interface_on_axis = 0.0;     // I_eps over J_0
  double limit_on_axis = 0.0;         // 2 pi sigma_hat l
  double ramp_kappa2 = 0.0;           // eps int kappa2^2 dmu over both ramps
  double ramp_bound = 0.0;            // 2 pi (sigma_hat / 2) alpha eps per ramp
  double x_shift = 0.0;
};

struct AxisRecovery {
  Fragment fragment;
  AxisReport report;
};

// Vertical drop of height `vertical` to the axis, axis segment of length l,
// vertical rise; phases of the two vertical parts given by left/right.
AxisRecovery axis_recovery(double eps, double length, double vertical, const MaterialModel& m,
                           int left_phase = 1, int right_phase = 1, double spacing = 0.0);

struct RecoveryOptions {
  std::size_t nodes = 0;  // final uniform grid size
  double spacing = 0.0;   // used when nodes == 0
  bool repair = true;
  double area_target = 0.0;   // 0 uses the limit area
  double phase_target = 0.0;  // used when phase_target_set
  bool phase_target_set = false;
  Variant variant = Variant::F_eps;
};

struct RecoveryReport {
  EnergyBreakdown energy;
  EnergyBreakdown limit;
  double gap = 0.0;  // energy.total - limit.total
  double area_before_repair = 0.0;
  double phase_before_repair = 0.0;
  double area_residual = 0.0;
  double phase_residual = 0.0;
  double x_shift = 0.0;
  double area_bump = 0.0;
  double phase_bump = 0.0;
  std::size_t smoothed_kinks = 0;
  std::size_t axis_constructions = 0;
  std::size_t nodes = 0;
};

struct Recovery {
  Curve curve;
  PhaseField phase;
  RecoveryReport report;
};

Recovery build_recovery(const LimitMembrane& mem, double eps, const MaterialModel& m,
                        const RecoveryOptions& opts = {});

}  // namespace membrane
