#pragma once

#include <cstddef>
#include <cstdint>

#include "membrane/energy.hpp"
#include "membrane/geometry.hpp"
#include "membrane/limit.hpp"

namespace membrane::shapes {

// Sphere of the given radius centred at (cx, 0), uniform in arclength.
Curve sphere(std::size_t nodes, double radius = 1.0, double cx = 0.0);

// Cylinder of length 3 and radius 1/2 with hemispherical caps, x in [-2, 2].
Curve capped_cylinder(std::size_t nodes);

// Initial phase field of the capped cylinder: -1, linear ramp 4x/3 + 2/3, +1.
PhaseField capped_cylinder_phase(const Curve& c);

// Open horizontal segment at height r from x = x0 to x0 + length.
Curve cylinder(std::size_t nodes, double radius, double length, double x0 = 0.0);

// Arc of the circle with centre (cx, 0) and radius r between polar angles
// t0 and t1 measured from the negative x axis, traversed left to right.
Segment arc(double cx, double radius, double t0, double t1, std::size_t samples, int phase);

// Sphere of the given radius with one proper interface along the equator.
LimitMembrane sphere_with_interface(double radius, std::size_t samples_per_segment);

// Two equal spherical caps meeting at a neck kink with the given jump angle;
// the left cap carries phase -1, the right +1, total area 4 pi.
LimitMembrane kinked_spheres(double jump_angle, std::size_t samples_per_segment);

// Two straight lines of length half_length meeting at height y, symmetric
// about the vertical, with total turning angle jump_angle.
LimitMembrane two_lines(double jump_angle, double height, double half_length, std::size_t samples_per_segment,
                        bool proper_interface = false, int phase = 1);

}  // namespace membrane::shapes

namespace membrane::shapes {

struct ShapeWithPhase {
  Curve curve;
  PhaseField phase;
};

// Two spheres of radius R joined by a cylinder of length l and diameter h
// through circular fillets of radius h. The phase is 0 on the cylinder and
// fillets and relaxes to -1 (left) and +1 (right) as tanh(d / eps) on the spheres.
ShapeWithPhase dumbbell(std::size_t nodes, double l, double h, double eps, double R = 1.0);

struct SignalShape {
  Curve curve;
  PhaseField phase;
  double eps = 0.0;
  double corner_radius = 0.0;
  double window_length = 0.0;  // length of the sharp signal, 2 + 1/k without tilt
  std::size_t window_first = 0, window_last = 0;
};

// k periods of a unit square wave scaled by 1/k^2 in x and 1/k in y, raised to
// height eps = c/k, with rounded corners, between two capped shoulders
// standing 1/4 above the signal. The phase vanishes on the signal and tends to +1 away from it.
// tilt > 0 slants the vertical edges by tilt times the half period.
SignalShape rectangular_signal(std::size_t nodes, int k, double c, double tilt = 0.0);

}  // namespace membrane::shapes

namespace membrane::shapes {

// Sphere radius perturbed by a few even cosine modes in the polar angle, with
// a smooth random phase; x stays monotone and the poles stay perpendicular.
ShapeWithPhase random_closed(std::size_t nodes, std::uint64_t seed, double amplitude = 0.05);

}  // namespace membrane::shapes
