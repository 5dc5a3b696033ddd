#include "rubberroll/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rubberroll/error.hpp"

namespace rubberroll {

namespace {

Vec3 shape_diagonal(const Params& p) { return {p.beta * p.beta, p.beta * p.beta, 1.0}; }

}  // namespace

Vec3 contact_vector_unchecked(const Vec3& gamma, const Params& p) {
  const Vec3 bg = shape_diagonal(p).cwiseProduct(gamma);
  return -bg / std::sqrt(gamma.dot(bg)) - Vec3(0.0, 0.0, p.alpha);
}

Vec3 contact_vector(const Vec3& gamma, const Params& p) {
  if (std::abs(gamma.norm() - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "contact_vector: gamma is not a unit vector (|gamma| = " << gamma.norm() << ")";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  return contact_vector_unchecked(gamma, p);
}

Vec3 contact_vector_rate(const Vec3& gamma, const Vec3& gamma_dot, const Params& p) {
  const Vec3 d = shape_diagonal(p);
  const Vec3 bg = d.cwiseProduct(gamma);
  const double s2 = gamma.dot(bg);
  const double s = std::sqrt(s2);
  return -d.cwiseProduct(gamma_dot) / s + bg * (bg.dot(gamma_dot) / (s2 * s));
}

SurfaceEval profile(double theta, const Params& p, ThetaDomain domain) {
  if (domain == ThetaDomain::kInterior && !(theta > 0.0 && theta < std::numbers::pi)) {
    std::ostringstream msg;
    msg << "profile: theta = " << theta << " outside (0, pi)";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double b2 = p.beta * p.beta;
  const double k = b2 - 1.0;

  SurfaceEval e;
  e.Z = std::sqrt(b2 * s * s + c * c);
  e.dZ = k * s * c / e.Z;
  const double d2Z = (k * (c * c - s * s) - e.dZ * e.dZ) / e.Z;

  e.U = p.alpha * c + e.Z;
  e.dU = -p.alpha * s + e.dZ;
  e.d2U = -p.alpha * c + d2Z;

  const double sign = p.b_sign == BSign::kPaper ? -1.0 : 1.0;
  const double q = c + sign * p.alpha * e.Z;
  const double dq = -s + sign * p.alpha * e.dZ;
  const double num = b2 * b2 * s * s + q * q;
  const double dnum = 2.0 * b2 * b2 * s * c + 2.0 * q * dq;
  const double z2 = e.Z * e.Z;
  e.B = 1.0 / p.eta + num / z2;
  e.dB = dnum / z2 - 2.0 * num * e.dZ / (z2 * e.Z);

  // (r, gamma) = -(Z + alpha cos(theta)) = -U
  const double j2 = (c * c + p.nu * s * s) / p.eta + e.U * e.U;
  e.J = std::sqrt(j2);
  e.dJ = (2.0 * (p.nu - 1.0) * s * c / p.eta + 2.0 * e.U * e.dU) / (2.0 * e.J);
  return e;
}

MeridianProfile meridian_profile(double gamma3, const Params& p) {
  if (!(std::abs(gamma3) <= 1.0)) {
    std::ostringstream msg;
    msg << "meridian_profile: |gamma3| = " << std::abs(gamma3) << " > 1";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const double b2 = p.beta * p.beta;
  const double z = std::sqrt(b2 * (1.0 - gamma3 * gamma3) + gamma3 * gamma3);
  return {-b2 / z, -gamma3 / z - p.alpha};
}

double contact_norm_sq(double gamma3, const Params& p) {
  const auto m = meridian_profile(gamma3, p);
  return m.chi1 * m.chi1 * (1.0 - gamma3 * gamma3) + m.chi2 * m.chi2;
}

double j_coefficient(double gamma3, const Params& p) {
  const double b2 = p.beta * p.beta;
  const double s2 = 1.0 - gamma3 * gamma3;
  const double height = std::sqrt(b2 * s2 + gamma3 * gamma3) + p.alpha * gamma3;
  return std::sqrt((gamma3 * gamma3 + p.nu * s2) / p.eta + height * height);
}

}  // namespace rubberroll
