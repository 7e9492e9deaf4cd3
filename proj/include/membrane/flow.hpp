#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "membrane/energy.hpp"
#include "membrane/geometry.hpp"
#include "membrane/materials.hpp"

namespace membrane {

// Curve gradients are plain nodal partials; phase gradients are divided by the
// metric weights returned by phase_metric_weights.
struct DiscreteGradient {
  EnergyBreakdown energy;
  std::vector<double> dx, dy, du;
};

// Area weights of the nodes; axis nodes borrow half the weight of their neighbour.
std::vector<double> phase_metric_weights(const Curve& c, double scale = 1.0);

DiscreteGradient discrete_gradient(const Curve& c, const PhaseField& u, const MaterialModel& m,
                                   const EnergyOptions& opts, double metric_scale = 1.0);

struct ConstraintValues {
  double area = 0.0;
  double phase_integral = 0.0;
  double volume = 0.0;
};

ConstraintValues constraint_values(const Curve& c, const PhaseField& u);

struct NodeGradient {
  std::vector<double> dx, dy, du;
};

struct ConstraintGradients {
  NodeGradient area, phase_integral, volume;
};

ConstraintGradients constraint_gradients(const Curve& c, const PhaseField& u, double metric_scale = 1.0);

// Inner product for the curve velocity: plain nodal L2, or nodal values weighted
// by the surface area element.
enum class CurveMetric { Nodal, Surface };
const char* to_string(CurveMetric m) noexcept;
CurveMetric parse_curve_metric(const std::string& name);

struct FlowConfig {
  Variant variant = Variant::F_eps;
  double eps = 0.05;
  double bending_exponent = 1.0;
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 1e3;
  double stationarity_tol = 1e-6;  // relative to max(1, |energy|)
  double constraint_tol = 1e-10;   // relative to the target area (volume: target volume)
  std::size_t max_steps = 20000;
  std::size_t reparam_interval = 0;  // 0 disables
  bool semi_implicit = true;
  CurveMetric curve_metric = CurveMetric::Nodal;
  double phase_metric_scale = 1.0;  // multiplies the phase weights; larger values slow the phase
  bool fix_volume = false;
  double pinch_tol = 1e-3;  // relative to the curve length
  double grow = 1.5;
  double shrink = 0.5;
  std::size_t log_every = 1;

  bool operator==(const FlowConfig&) const = default;
};

void validate_config(const FlowConfig& cfg);

struct FlowState {
  Curve curve;
  PhaseField phase;
  double area_target = 0.0;
  double phase_target = 0.0;
  double volume_target = 0.0;
  double lambda_area = 0.0;
  double lambda_phase = 0.0;
  double lambda_volume = 0.0;
  double time = 0.0;
  std::size_t step_count = 0;
  EnergyBreakdown energy;
};

// Targets are taken from the given pair.
FlowState make_flow_state(Curve c, PhaseField u, const MaterialModel& m, const FlowConfig& cfg);

struct StepReport {
  double energy_before = 0.0;
  double energy_after = 0.0;
  double grad_norm = 0.0;
  double area_residual = 0.0;
  double phase_residual = 0.0;
  double volume_residual = 0.0;
  std::size_t restoration_iterations = 0;
};

// Throws StepRejected when the trial state has higher energy or leaves the
// admissible set; the state is then left untouched.
StepReport project_step(FlowState& state, const MaterialModel& m, const FlowConfig& cfg, double dt);

// Newton projection onto the constraint set without an energy step.
void restore_constraints(FlowState& state, const MaterialModel& m, const FlowConfig& cfg);

struct TrajectoryRow {
  std::size_t step = 0;
  double time = 0.0;
  double dt = 0.0;
  EnergyBreakdown energy;
  double grad_norm = 0.0;
  double area_residual = 0.0;
  double phase_residual = 0.0;
  double max_phi_prime = 0.0;
};

enum class FlowStatus { Stationary, MaxSteps, Stalled, PinchOff };
const char* to_string(FlowStatus s) noexcept;

struct FlowResult {
  FlowState state;
  FlowStatus status = FlowStatus::MaxSteps;
  std::vector<TrajectoryRow> trajectory;
  std::size_t rejected = 0;
  std::size_t reparametrizations = 0;
  double final_grad_norm = 0.0;
  double max_constraint_drift = 0.0;  // relative to the area target
  bool max_steps_exceeded = false;
};

using FlowObserver = std::function<void(const TrajectoryRow&)>;

FlowResult evolve_to_stationary(FlowState state, const MaterialModel& m, const FlowConfig& cfg,
                                const FlowObserver& observer = {});

// max |phi'| over the curve, with phi' from chord differences of the angle.
double max_angle_derivative(const Curve& c);

}  // namespace membrane
