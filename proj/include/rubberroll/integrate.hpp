#pragma once

// Adaptive integration of the full and reduced systems, section events on
// p_theta = 0, reduced periods, and the kappa = 0 pole bookkeeping.

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "rubberroll/dynamics.hpp"

namespace rubberroll {

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-10;
  long max_steps = 5'000'000;
};

// ---------------------------------------------------------------------------
// Full system

struct FullSample {
  double t = 0.0;
  FullState state;
};

struct FullDrift {
  double F0 = 0.0;         ///< max |F0(t) - F0(0)| before renormalization
  double F1 = 0.0;         ///< max |F1(t) - F1(0)|
  double kappa_rel = 0.0;  ///< max |kappa(t) - kappa(0)| / max(1, |kappa(0)|)
  double eps_rel = 0.0;    ///< max |eps(t) - eps(0)| / max(1, |eps(0)|)
  double max_renormalization = 0.0;  ///< largest | |gamma| - 1 | removed by projection
  long steps = 0;
  long rejected = 0;
};

struct FullTrajectory {
  std::vector<FullSample> samples;
  FullDrift drift;
};

/// Integrates from t = 0 to t_end (negative t_end runs backward). Output at
/// multiples of dt_out through the dense output, or at every accepted step
/// when dt_out <= 0. gamma is projected back to unit length after each step.
FullTrajectory integrate_full(const FullState& init, double t_end, const Params& p, const Tolerance& tol = {},
                              double dt_out = 0.0);

// ---------------------------------------------------------------------------
// Reduced system with the angle quadratures and the center-of-mass path

/// (theta, p_theta, psi, phi, x_c, y_c). For kappa == 0 theta lives on the
/// unfolded meridian circle and may leave [0, pi]; fold_meridian maps it back.
using ReducedVector = Eigen::Matrix<double, 6, 1>;

/// Right-hand side of the augmented reduced system.
ReducedVector reduced_augmented_rhs(const ReducedVector& y, double kappa, const Params& p);

struct SectionEvent {
  double t = 0.0;
  ReducedVector state;
  int direction = 0;  ///< sign of d(p_theta)/dt at the crossing
};

struct PoleEvent {
  double t = 0.0;
  double theta = 0.0;  ///< unfolded value, a multiple of pi
};

struct ReducedOptions {
  Tolerance tol;
  double dt_out = 0.0;         ///< <= 0: record every accepted step
  bool record = true;          ///< store samples at all
  int stop_after_sections = 0; ///< stop at the n-th p_theta = 0 crossing (0: never)
  int stop_after_poles = 0;    ///< stop at the n-th pole crossing (kappa == 0 only)
};

struct ReducedTrajectory {
  std::vector<double> t;
  std::vector<ReducedVector> y;  ///< unfolded states; only the final one when not recording
  std::vector<SectionEvent> sections;
  std::vector<PoleEvent> poles;
  double eps0 = 0.0;
  double max_eps_drift = 0.0;  ///< max |eps(t) - eps(0)| / max(1, |eps(0)|)
  long steps = 0;
  long rejected = 0;
};

ReducedTrajectory integrate_reduced(const ReducedVector& init, double kappa, double t_end, const Params& p,
                                    const ReducedOptions& options = {});

/// Gluing rule for kappa == 0: at a pole, continue with theta -> -theta
/// (mod 2 pi), p_theta -> -p_theta, phi -> phi + pi, psi -> psi + pi. The
/// Euler matrix satisfies Q(psi, -theta, phi) = Q(psi + pi, theta, phi + pi),
/// so the body configuration and the center-of-mass path are continuous.
/// Requires kappa == 0 and theta within 1e-8 of a multiple of pi.
ReducedVector pole_glue(const ReducedVector& y, double kappa);

/// Applies the gluing rule as often as needed to bring theta into [0, pi].
ReducedVector fold_meridian(const ReducedVector& y);

// ---------------------------------------------------------------------------
// Reduced period

struct SectionPeriod {
  double T = 0.0;          ///< period of theta(t); 0 at a fixed point
  double theta_min = 0.0;  ///< physical range, inside [0, pi]
  double theta_max = 0.0;
  double psi_advance = 0.0;  ///< increment of psi over one period
  double phi_advance = 0.0;
  std::complex<double> drift{0.0, 0.0};  ///< center-of-mass displacement over one period
  bool fixed_point = false;
  bool through_pole = false;  ///< kappa == 0 orbit crossing a vertex
  bool full_circle = false;   ///< kappa == 0 rolling over both vertices
  double eps_drift = 0.0;
};

/// `branch` indexes the connected components of the level set in theta
/// order. Throws kOutsideRegion when the level set is empty.
SectionPeriod section_period(double kappa, double eps, int branch, const Params& p, const Tolerance& tol = {});

}  // namespace rubberroll
