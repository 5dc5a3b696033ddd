#pragma once

// Parameter containers for an ellipsoid of revolution rolling on a plane
// without slipping or spinning. Everything downstream works with the four
// dimensionless parameters in Params; dimensional data only enters through
// nondimensionalize().

#include <string>
#include <vector>

namespace rubberroll {

/// Which cross term enters the reduced inertia coefficient B(theta).
/// kDerived uses (cos(theta) + alpha Z)^2, which equals 1/eta + |r|^2 for the
/// contact vector r; kPaper uses the printed (alpha Z - cos(theta))^2.
enum class BSign { kDerived, kPaper };

#if defined(RUBBERROLL_B_SIGN_PAPER)
inline constexpr BSign kDefaultBSign = BSign::kPaper;
#else
inline constexpr BSign kDefaultBSign = BSign::kDerived;
#endif

struct Params {
  double alpha = 0.0;  ///< center-of-mass offset a/b3, in [0, 1]
  double beta = 1.0;   ///< aspect ratio b1/b3, in (0, inf)
  double nu = 1.0;     ///< inertia ratio i3/i1, in (0, 2]
  double eta = 1.0;    ///< m b3^2 / i1, in (0, inf)
  BSign b_sign = kDefaultBSign;
};

struct DimensionalBody {
  double m = 0.0;   // [kg]
  double g = 0.0;   // [m/s^2]
  double a = 0.0;   // center-of-mass offset along the symmetry axis [m]
  double b1 = 0.0;  // equatorial semiaxis [m]
  double b3 = 0.0;  // polar semiaxis [m]
  double i1 = 0.0;  // [kg m^2]
  double i3 = 0.0;  // [kg m^2]
};

/// Units of the dimensionless system: length b3, mass m, time sqrt(b3/g).
struct Scales {
  double length = 1.0;
  double mass = 1.0;
  double time = 1.0;
};

struct Nondimensionalized {
  Params params;
  Scales scales;
};

/// Values of the linear integral (kappa) and the energy (eps), dimensionless.
struct IntegralConstants {
  double kappa = 0.0;
  double eps = 0.0;
};

/// Violated invariants of p, empty when p is admissible.
std::vector<std::string> validate(const Params& p);

/// Positivity checks on raw body data. Range checks happen on the
/// resulting Params so the diagnostics name the dimensionless bound.
std::vector<std::string> validate(const DimensionalBody& body);

/// Throws Error(kInvalidArgument) listing every violated invariant.
void require_valid(const Params& p);

Nondimensionalized nondimensionalize(const DimensionalBody& body);

const char* to_string(BSign sign);
BSign parse_b_sign(const std::string& text);

}  // namespace rubberroll
