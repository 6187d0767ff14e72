#pragma once

#include "cpdesign/materials.hpp"

namespace cpd {

/// Ground-state U for a single-axis atom at distance z in front of a perfectly conducting half-space,
/// from the imaginary-frequency integral U = (1/2pi) int_0^inf xi^2 a(i xi) G1(z, i xi) d xi.
/// `perpendicular` selects the atom axis along the plane normal; otherwise the axis is parallel.
double plane_potential(const AtomModel& atom, double z, bool perpendicular = false);

/// Nonretarded limit -a0 wa (1 + [perpendicular]) / (128 pi z^3) for an undamped atom.
double plane_potential_nonretarded(const AtomModel& atom, double z, bool perpendicular = false);

/// Least-squares slope of log|U| against log z.
double loglog_slope(const double* z, const double* u, int n);

}  // namespace cpd
