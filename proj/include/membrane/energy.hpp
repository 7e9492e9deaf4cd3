#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "membrane/geometry.hpp"
#include "membrane/materials.hpp"

namespace membrane {

// Nodal phase values on the same grid as the companion curve.
using PhaseField = std::vector<double>;

enum class Variant { F_eps, E_eps, Fhat_eps };

const char* to_string(Variant v) noexcept;
Variant parse_variant(const std::string& name);

struct EnergyBreakdown {
  double helfrich = 0.0;
  double interface_gradient = 0.0;
  double interface_well = 0.0;
  double interface_bending = 0.0;
  double total = 0.0;
  double area = 0.0;
  double phase_integral = 0.0;
  double volume = 0.0;

  double interface() const { return interface_gradient + interface_well + interface_bending; }
};

struct EnergyOptions {
  Variant variant = Variant::F_eps;
  double eps = 0.05;
  // Exponent p of the eps^p |B|^2 term.
  double bending_exponent = 1.0;
  // Inclusive node range; last = npos means the whole curve.
  std::size_t first = 0;
  std::size_t last = static_cast<std::size_t>(-1);
  GeometryOptions geometry{};
};

void validate_phase_field(const Curve& c, const PhaseField& u, double C0);

EnergyBreakdown total_energy(const Curve& c, const PhaseField& u, const MaterialModel& m,
                             const EnergyOptions& opts);
EnergyBreakdown total_energy(const Curve& c, const PhaseField& u, const MaterialModel& m, double eps,
                             Variant variant);

double helfrich_eps(const Curve& c, const PhaseField& u, const MaterialModel& m);
double interface_eps(const Curve& c, const PhaseField& u, const MaterialModel& m, double eps);

// Partial derivatives of the discrete energy with respect to every nodal value.
struct EnergyGradient {
  EnergyBreakdown energy;
  std::vector<double> dx, dy, du;
};

EnergyGradient energy_partials(const Curve& c, const PhaseField& u, const MaterialModel& m,
                               const EnergyOptions& opts);

struct FirstVariationReport {
  double integral_B = 0.0;       // int |B| dmu
  double integral_abs_H = 0.0;   // int |H| dmu
  double two_pi_length = 0.0;
  double length = 0.0;
  double area = 0.0;
  double F_eps = 0.0;
  double helfrich = 0.0;
  double positivity_floor = 0.0;  // -||Hs||^2 ||u||^2 A
  double ratio = 0.0;             // int |B| / (F_eps + 1), +inf when F_eps + 1 <= 0
  bool length_bound = false;
  bool bending_positivity = false;
};

FirstVariationReport first_variation_bound_check(const Curve& c, const PhaseField& u,
                                                 const MaterialModel& m, double eps,
                                                 double length_slack = 0.0);

}  // namespace membrane
