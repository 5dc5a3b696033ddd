#pragma once

// Critical sets of the integral map: equilibria, permanent rotations, the
// bifurcation curves on the (kappa, eps) plane and their stability labels.

#include <optional>
#include <string>
#include <vector>

#include "rubberroll/dynamics.hpp"

namespace rubberroll {

enum class Stability { kCenter, kSaddle };

const char* to_string(Stability s);

struct LinearStability {
  double lambda_sq = 0.0;  ///< G0'(theta0) / B(theta0)
  Stability type = Stability::kCenter;
};

/// Requires a fixed point: G0(theta0) = 0 for the given kappa, or a vertex
/// with kappa = 0. Throws kNotFixedPoint otherwise.
LinearStability linear_stability(double theta0, double kappa, const Params& p);

/// Squared rate of the permanent rotation at inclination theta (unit
/// transverse normalization of the angular velocity). Negative values mean
/// no rotation exists at that inclination.
double omega0_sq(double theta, const Params& p);

struct PermanentRotation {
  double theta0 = 0.0;
  double omega0 = 0.0;
  double kappa = 0.0;  ///< nonnegative branch
  double eps = 0.0;
  double rho_c = 0.0;  ///< radius of the center-of-mass circle
  double rho_p = 0.0;  ///< radius of the contact-point circle
  double z_c = 0.0;
  double lambda_sq = 0.0;
  Stability stability = Stability::kCenter;
  FullState state;  ///< body-frame state with phi = 0
};

PermanentRotation permanent_rotation(double theta0, const Params& p);

/// (kappa >= 0, eps) of the permanent rotation at theta0, or nothing when
/// kappa^2 < 0 there.
struct CurvePoint {
  double theta0 = 0.0;
  double kappa = 0.0;
  double eps = 0.0;
};
std::optional<CurvePoint> sigma_theta_point(double theta0, const Params& p);

/// Root of cos(theta)(1 - beta^2) + alpha Z(theta) on [0, pi] by bisection
/// (1e-12). Absent when beta^2 lies strictly between 1 - alpha and 1 + alpha,
/// and for the balanced sphere.
std::optional<double> inclined_equilibrium(const Params& p);

/// Closed form cos^2 = alpha^2 beta^2 / ((1 - beta^2)(1 - beta^2 - alpha^2)).
std::optional<double> inclined_equilibrium_closed_form(const Params& p);

/// The other closed forms in circulation, which carry the opposite sign of
/// alpha^2: cos = alpha beta / sqrt((1 - beta^2)(1 + alpha^2 - beta^2)) and
/// eps = beta sqrt((1 + alpha^2 - beta^2)/(1 - beta^2)). Kept to show that
/// they do not satisfy the equilibrium condition.
struct AlternativeClosedForms {
  std::optional<double> theta_star;
  std::optional<double> eps_min;
};
AlternativeClosedForms alternative_closed_forms(const Params& p);

struct Cusp {
  double theta = 0.0;
  double kappa = 0.0;
  double eps = 0.0;
};

/// Simultaneous root of G0 and G0' along the permanent rotations; exists iff
/// alpha > 0 and beta^2 > 1 + alpha.
std::optional<Cusp> cusp(const Params& p);

struct CurveSample {
  double theta0 = 0.0;
  double kappa = 0.0;
  double eps = 0.0;
  Stability stability = Stability::kCenter;
};

struct Curve {
  std::string label;  ///< sigma_s0, sigma_spi, sigma_u, sigma_pi2
  int kappa_sign = 1;
  std::vector<CurveSample> samples;
};

struct CurveOptions {
  double max_arc = 1e-3;       ///< max distance between neighbours on the (kappa, eps) plane
  double kappa_window = 3.0;   ///< curves are cut at |kappa| > window
  double eps_window = 12.0;    ///< and at eps > window
  bool mirror = true;          ///< also emit the kappa < 0 images
};

/// Permanent-rotation curves split into pieces of constant stability.
std::vector<Curve> sigma_theta_curve(const Params& p, const CurveOptions& opt = {});

/// eps = kappa^2/2 + beta, rolling on the equator; requires alpha == 0.
Curve equator_parabola(const Params& p, const CurveOptions& opt = {});

enum class DiagramType { kA, kB, kC, kD, kE };

const char* to_string(DiagramType t);

struct SingularPoint {
  std::string label;
  double theta = 0.0;
  double kappa = 0.0;
  double eps = 0.0;
  bool isolated = false;
  bool stable = false;
};

struct BifurcationDiagram {
  Params params;
  DiagramType type = DiagramType::kA;
  bool boundary = false;
  std::vector<Curve> curves;
  std::vector<SingularPoint> points;
  std::optional<Cusp> cusp;
  std::optional<double> theta_star;
  double eps_min = 0.0;
  std::string rpm_boundary;
};

DiagramType diagram_type(const Params& p, bool* boundary = nullptr);

BifurcationDiagram diagram(const Params& p, const CurveOptions& opt = {});

struct Components {
  int count = 0;
  std::vector<LevelInterval> intervals;
};

Components connected_components(double kappa, double eps, const Params& p);

struct ReducedFixedPoint {
  double theta = 0.0;
  double eps = 0.0;
  LinearStability stability;
};

/// Fixed points of the reduced system at this kappa (p_theta = 0, G0 = 0),
/// vertices included when kappa == 0.
std::vector<ReducedFixedPoint> reduced_fixed_points(double kappa, const Params& p);

}  // namespace rubberroll
