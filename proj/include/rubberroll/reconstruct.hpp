#pragma once

// Motion in the fixed frame: Euler angles, center-of-mass and contact-point
// paths, the rotation number and the classification of trajectories.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rubberroll/bifurcation.hpp"
#include "rubberroll/integrate.hpp"

namespace rubberroll {

struct QuadratureRates {
  double psi_dot = 0.0;
  double phi_dot = 0.0;
  double omega3 = 0.0;
};

QuadratureRates quadrature_rates(double theta, double kappa, const Params& p);

/// Rotation matrix in Euler angles. Its columns are the fixed-frame axes in
/// body coordinates; the third column is gamma.
Mat3 euler_matrix(double psi, double theta, double phi);

struct AbsoluteSample {
  double t = 0.0;
  double theta = 0.0;
  double p_theta = 0.0;
  double psi = 0.0;
  double phi = 0.0;
  double x_c = 0.0;
  double y_c = 0.0;
  double z_c = 0.0;
  double x_p = 0.0;
  double y_p = 0.0;
  double eps_drift = 0.0;  ///< eps(t) - eps(0)
  double f1_drift = 0.0;   ///< (omega, gamma) at t
};

struct AbsoluteInit {
  double psi0 = 0.0;
  double phi0 = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
};

struct AbsoluteTrajectory {
  std::vector<AbsoluteSample> samples;
  std::vector<double> pole_times;
  double max_eps_drift = 0.0;  ///< relative to max(1, |eps(0)|)
  double max_f1_drift = 0.0;
  double max_kappa_drift = 0.0;
  double max_renormalization = 0.0;  ///< full system only: largest | |gamma| - 1 | removed per step
  long steps = 0;
};

/// Integrates the reduced system together with the angle quadratures and the
/// center-of-mass equation; the contact point comes from the Euler matrix.
AbsoluteTrajectory reconstruct_trajectory(const ReducedState& init, double kappa, double t_end, const Params& p,
                                          const AbsoluteInit& at = {}, const Tolerance& tol = {},
                                          double dt_out = 0.0);

/// Independent route: the full system in (omega, gamma) plus the fixed-frame
/// axes and the center of mass in absolute space. phi0 is taken from gamma.
AbsoluteTrajectory integrate_kinematics(const FullState& init, double t_end, const Params& p,
                                        const AbsoluteInit& at = {}, const Tolerance& tol = {}, double dt_out = 0.0);

// ---------------------------------------------------------------------------

struct RotationNumber {
  double N = 0.0;
  double N_err = 0.0;
  double T = 0.0;             ///< reduced period (0 at a fixed point)
  bool fixed_point = false;   ///< N from the linearized frequency
  std::complex<double> drift{0.0, 0.0};  ///< center-of-mass displacement per period
};

RotationNumber rotation_number(double kappa, double eps, int branch, const Params& p, const Tolerance& tol = {});

enum class TrajectoryClass {
  kPoint,
  kCircle,
  kUnboundedLine,
  kSegment,
  kUnboundedResonant,
  kClosedPeriodic,
  kQuasiPeriodicBounded,
  kAsymptoticToCircles,
  kAsymptoticToLines,
};

const char* to_string(TrajectoryClass c);

struct ClassifyOptions {
  Tolerance tol;
  double tol_rat_floor = 0.0;  ///< lower bound on the rational/integer acceptance tolerance
  int q_max = 64;
  double separatrix_tol = 1e-9;
  double near_separatrix_tol = 1e-6;
};

struct Classification {
  TrajectoryClass cls = TrajectoryClass::kQuasiPeriodicBounded;
  bool has_N = false;
  double N = 0.0;
  double N_err = 0.0;
  double tolerance = 0.0;  ///< acceptance tolerance used for the rational test
  long numerator = 0;      ///< resonance N = numerator / denominator
  long denominator = 0;
  bool asymptotic = false;
  bool near_separatrix = false;
  int components = 0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::string target;  ///< what asymptotic or fixed-point motions approach
};

Classification classify(double kappa, double eps, int branch, const Params& p, const ClassifyOptions& opt = {});

/// Convergents of the continued fraction of x with denominator <= q_max;
/// returns the first within tol.
std::optional<std::pair<long, long>> rational_approximation(double x, double tol, int q_max);

// ---------------------------------------------------------------------------

struct ResonancePoint {
  double kappa = 0.0;
  double eps = 0.0;
  double N = 0.0;
};

struct ResonanceOptions {
  Tolerance tol;
  int branch = 0;
  double eps_span = 3.0;  ///< scan above the highest critical level of each slice
  unsigned jobs = 1;
};

/// Points where N(kappa, eps) = -n on each kappa of the grid. Output order
/// follows the grid, then eps.
std::vector<ResonancePoint> resonance_curve(int n, const Params& p, const std::vector<double>& kappas,
                                            const ResonanceOptions& opt = {});

struct RotationGridPoint {
  double kappa = 0.0;
  double eps = 0.0;
  double N = 0.0;      ///< nan outside the region of possible motions
  double N_err = 0.0;
  bool inside = false;
};

/// N over kappas x energies, kappa-major; independent of `jobs`.
std::vector<RotationGridPoint> rotation_grid(const std::vector<double>& kappas, const std::vector<double>& energies,
                                             int branch, const Params& p, const Tolerance& tol = {},
                                             unsigned jobs = 1);

/// Threshold energy above which the kappa = 0 motion rolls over both vertices.
double epsilon_min(const Params& p);

/// beta sqrt((beta^2 - 1 + alpha^2)/(beta^2 - 1)), valid for beta^2 > 1 + alpha.
std::optional<double> epsilon_min_closed_form(const Params& p);

struct KappaMax {
  double kappa = 0.0;
  double eps = 0.0;       ///< where N is extremal on that slice
  double N = 0.0;         ///< residual of N = 0
  double dN_deps = 0.0;   ///< residual of the extremum condition
};

/// Largest kappa on the N = 0 resonance curve; requires alpha > 0 and
/// beta^2 > 1 + alpha.
std::optional<KappaMax> kappa_max(const Params& p, const ResonanceOptions& opt = {});

}  // namespace rubberroll
