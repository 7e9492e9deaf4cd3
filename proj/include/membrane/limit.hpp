#pragma once

#include <cstddef>
#include <vector>

#include "membrane/energy.hpp"
#include "membrane/geometry.hpp"
#include "membrane/materials.hpp"

namespace membrane {

// Smooth piece of a sharp-interface membrane, sampled densely, with a pure phase.
struct Segment {
  std::vector<double> x;
  std::vector<double> y;
  int phase = 1;

  double length() const;
  Point front() const { return {x.front(), y.front()}; }
  Point back() const { return {x.back(), y.back()}; }
};

// Junction between segment `segment` and segment `segment + 1`.
struct Kink {
  std::size_t segment = 0;
  double position = 0.0;  // arclength from the start of the membrane
  double height = 0.0;
  double jump_angle = 0.0;
  bool proper_interface = false;
};

// Piece of the axis of revolution inserted before segment `before_segment`.
struct AxisSegment {
  double length = 0.0;
  std::size_t before_segment = 0;
};

struct LimitMembrane {
  std::vector<Segment> segments;
  std::vector<Kink> kinks;
  std::vector<AxisSegment> axis_segments;
  double speed = 1.0;

  double total_length() const;
  const Kink* kink_after(std::size_t segment) const;
  const AxisSegment* axis_before(std::size_t segment) const;
};

// Throws InvalidArgument when segments do not join up or kink records are malformed.
void validate_membrane(const LimitMembrane& mem);

// Jump angle recomputed from one-sided end tangents of the adjacent segments.
double measured_jump_angle(const LimitMembrane& mem, std::size_t kink);
// Throws InvalidArgument when stored and measured jump angles differ by more than tol.
void check_jump_angles(const LimitMembrane& mem, double tol = 1e-3);

// Line tension carried by a kink or interface (sigma for proper interfaces,
// twice the one-sided constant for ghost interfaces, zero for smooth joins).
double kink_line_tension(const Kink& k, const LimitMembrane& mem, const MaterialModel& m);

double limit_helfrich(const LimitMembrane& mem, const MaterialModel& m);
double limit_interface(const LimitMembrane& mem, const MaterialModel& m);
EnergyBreakdown total_limit_energy(const LimitMembrane& mem, const MaterialModel& m);

struct SimplifyReport {
  std::size_t removed_components = 0;
  std::size_t modified_ends = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double area_before = 0.0;
  double area_after_cut = 0.0;
  double area_after = 0.0;
  double phase_integral_before = 0.0;
  double phase_integral_after = 0.0;
};

struct Simplified {
  LimitMembrane membrane;
  SimplifyReport report;
};

// Removes components shorter than delta, replaces component ends on the axis
// by a vertical drop plus an axis horizontal and restores the area.
Simplified simplify_membrane(const LimitMembrane& mem, double delta, const MaterialModel& m);

// Smooth bump supported on the middle third of [a, b] with unit integral.
double bump(double s, double a, double b);
// Integral of bump from a to s.
double smooth_step(double s, double a, double b);

}  // namespace membrane
