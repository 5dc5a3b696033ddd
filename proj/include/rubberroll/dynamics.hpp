#pragma once

// Equations of motion in two descriptions:
//  - the full system in body-frame (omega, gamma), regular everywhere;
//  - the one-degree-of-freedom system in (theta, p_theta) on a level set of
//    the linear integral kappa, singular at the poles unless kappa = 0.

#include <vector>

#include "rubberroll/geometry.hpp"

namespace rubberroll {

struct FullState {
  Vec3 omega = Vec3::Zero();  ///< body-frame angular velocity
  Vec3 gamma = Vec3::UnitZ(); ///< body-frame vertical unit vector
};

struct FullRates {
  Vec3 omega_dot;
  Vec3 gamma_dot;
};

struct ReducedState {
  double theta = 0.0;
  double p_theta = 0.0;
};

struct ReducedRates {
  double theta_dot = 0.0;
  double p_theta_dot = 0.0;
};

struct Integrals {
  double F0 = 0.0;     ///< (gamma, gamma)
  double F1 = 0.0;     ///< (omega, gamma), the no-spin constraint
  double kappa = 0.0;  ///< J(gamma3) omega3
  double eps = 0.0;    ///< energy
};

/// Throws Error(kInvalidArgument) unless |gamma| = 1 and (omega, gamma) = 0 to 1e-9.
void check_invariants(const FullState& s);

/// Inertia tensor about the contact point, I + |r|^2 E - r (x) r.
Mat3 contact_inertia(const Vec3& gamma, const Params& p);

FullRates full_rhs(const FullState& s, const Params& p);

/// With kappa != 0 the state must stay off the poles (throws "pole reached
/// with nonzero κ"). With kappa == 0 any real theta is accepted: that is the
/// unfolded meridian chart in which the poles are regular points.
ReducedRates reduced_rhs(const ReducedState& s, double kappa, const ProfileProvider& profile);
ReducedRates reduced_rhs(const ReducedState& s, double kappa, const Params& p);

Integrals integrals(const FullState& s, const Params& p);

/// Invariant-measure density (1/eta + |r|^2) J(gamma3).
double measure_density(double gamma3, const Params& p);

/// kappa^2 / (2 sin^2 theta) + U(theta); for kappa == 0 this is U on the
/// unfolded meridian circle.
double effective_potential(double theta, double kappa, const Params& p);

/// G0(theta) = -dV/dtheta, the generalized force at p_theta = 0.
double effective_force(double theta, double kappa, const Params& p);

/// dG0/dtheta.
double effective_force_slope(double theta, double kappa, const Params& p);

/// Energy from reduced data: B p^2/2 + kappa^2/(2 sin^2) + U.
double reduced_energy(const ReducedState& s, double kappa, const Params& p);

struct ReducedCoordinates {
  ReducedState state;
  double kappa = 0.0;
  double phi = 0.0;       ///< proper rotation, gamma1 = sin(theta) sin(phi)
  double psi_rate = 0.0;  ///< precession rate at this state
};

ReducedCoordinates reduce(const FullState& s, const Params& p);

FullState lift(const ReducedState& r, double kappa, double phi, const Params& p);

// ---------------------------------------------------------------------------
// Level sets of the effective potential on the reduced phase line.

struct CriticalPoint {
  double theta = 0.0;
  double value = 0.0;
  bool maximum = false;
};

/// Critical points of V on (0, pi) for kappa != 0; on [0, pi] (poles
/// included) for kappa == 0. Sorted by theta.
std::vector<CriticalPoint> effective_critical_points(double kappa, const Params& p);

/// One connected component of {theta : V(theta) <= eps}, in theta order.
/// For kappa == 0 an interval touching a pole continues through it on the
/// unfolded circle; full_circle marks rolling over both vertices.
struct LevelInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool touches_zero = false;
  bool touches_pi = false;
  bool full_circle = false;
  bool degenerate = false;  ///< eps equals the well minimum: a fixed point
};

std::vector<LevelInterval> level_set_intervals(double kappa, double eps, const Params& p);

/// Solves V(theta) = eps inside [lo, hi] where V - eps changes sign
/// (bisection, then Newton polish to 1e-12).
double solve_turning_point(double kappa, double eps, double lo, double hi, const Params& p);

}  // namespace rubberroll
