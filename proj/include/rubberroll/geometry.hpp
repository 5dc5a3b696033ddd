#pragma once

// Surface functions of an ellipsoid of revolution with semiaxes (beta, beta, 1)
// and center of mass shifted by alpha along the symmetry axis, all expressed in
// the body frame and in units of the polar semiaxis.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "rubberroll/model.hpp"

namespace rubberroll {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Functions of the nutation angle theta that drive the reduced system.
struct SurfaceEval {
  double Z = 0.0;   ///< height of the geometric center above the plane
  double U = 0.0;   ///< potential energy alpha cos(theta) + Z
  double B = 0.0;   ///< effective inertia of the nutation mode
  double J = 0.0;   ///< coefficient of the linear integral, kappa = J omega3
  double dZ = 0.0;
  double dU = 0.0;
  double dB = 0.0;
  double dJ = 0.0;
  double d2U = 0.0;
};

/// kInterior accepts theta in (0, pi) only. kExtended accepts any real theta;
/// the formulas are analytic there and the kappa = 0 meridian chart needs them
/// at and across the poles.
enum class ThetaDomain { kInterior, kExtended };

/// Contact point relative to the center of mass; gamma must be a unit vector.
Vec3 contact_vector(const Vec3& gamma, const Params& p);

/// Same formula without the unit-norm precondition. The vector depends only on
/// the direction of gamma, so right-hand-side evaluations may use it between
/// renormalizations.
Vec3 contact_vector_unchecked(const Vec3& gamma, const Params& p);

/// Time derivative of the contact vector for a given gamma_dot (chain rule).
Vec3 contact_vector_rate(const Vec3& gamma, const Vec3& gamma_dot, const Params& p);

SurfaceEval profile(double theta, const Params& p, ThetaDomain domain = ThetaDomain::kInterior);

/// Meridian functions chi1, chi2 with r = (chi1 g1, chi1 g2, chi2).
struct MeridianProfile {
  double chi1 = 0.0;
  double chi2 = 0.0;
};

MeridianProfile meridian_profile(double gamma3, const Params& p);

/// |r|^2 as a function of gamma3.
double contact_norm_sq(double gamma3, const Params& p);

/// Dimensionless J(gamma3) = sqrt((g3^2 + nu (1 - g3^2))/eta + (r, gamma)^2).
double j_coefficient(double gamma3, const Params& p);

/// Seam for bodies of revolution other than the ellipsoid: the reduced system
/// only needs these functions of theta.
class ProfileProvider {
 public:
  virtual ~ProfileProvider() = default;
  virtual SurfaceEval eval(double theta, ThetaDomain domain) const = 0;
};

class EllipsoidProfile final : public ProfileProvider {
 public:
  explicit EllipsoidProfile(const Params& p) : params_(p) {}

  SurfaceEval eval(double theta, ThetaDomain domain) const override { return profile(theta, params_, domain); }

  const Params& params() const noexcept { return params_; }

 private:
  Params params_;
};

}  // namespace rubberroll
