#include "rubberroll/dynamics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rubberroll/error.hpp"

namespace rubberroll {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleGuard = 1e-12;
constexpr int kCriticalGrid = 4096;

Mat3 inertia_about_contact(const Vec3& r, const Params& p) {
  Mat3 j = Mat3::Zero();
  j.diagonal() << 1.0 / p.eta, 1.0 / p.eta, p.nu / p.eta;
  j += r.squaredNorm() * Mat3::Identity() - r * r.transpose();
  return j;
}

[[noreturn]] void pole_with_spin(double theta) {
  std::ostringstream msg;
  msg << "pole reached with nonzero κ (theta = " << theta << ")";
  throw Error(ErrorCode::kNumericalFailure, msg.str());
}

double level_tolerance(double eps) { return 1e-12 * std::max(1.0, std::abs(eps)); }

// Bisection on the sign of G0 between a and b (G0(a) G0(b) < 0).
double refine_critical(double a, double b, double kappa, const Params& p) {
  double ga = effective_force(a, kappa, p);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    const double gm = effective_force(m, kappa, p);
    if (gm == 0.0) return m;
    if ((gm > 0.0) == (ga > 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

void check_invariants(const FullState& s) {
  const double n = s.gamma.norm();
  const double f1 = s.omega.dot(s.gamma);
  if (std::abs(n - 1.0) > 1e-9 || std::abs(f1) > 1e-9) {
    std::ostringstream msg;
    msg << "state off the constraint manifold: |gamma| - 1 = " << n - 1.0 << ", (omega, gamma) = " << f1;
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
}

Mat3 contact_inertia(const Vec3& gamma, const Params& p) {
  return inertia_about_contact(contact_vector_unchecked(gamma, p), p);
}

FullRates full_rhs(const FullState& s, const Params& p) {
  const Vec3& w = s.omega;
  const Vec3& g = s.gamma;
  const Vec3 gd = g.cross(w);
  const Vec3 r = contact_vector_unchecked(g, p);
  const Vec3 rd = contact_vector_rate(g, gd, p);
  const Mat3 j = inertia_about_contact(r, p);

  const Vec3 x = w.cross(j * w) + r.cross(w.cross(rd)) + g.cross(r);
  const Eigen::LLT<Mat3> llt(j);
  const Vec3 jg = llt.solve(g);
  // Multiplier of the no-spin constraint: keeps (omega_dot, gamma) = 0.
  const double mu = x.dot(jg) / g.dot(jg);
  return {llt.solve(mu * g - x), gd};
}

ReducedRates reduced_rhs(const ReducedState& s, double kappa, const ProfileProvider& profile) {
  double centrifugal = 0.0;
  ThetaDomain domain = ThetaDomain::kExtended;
  if (kappa != 0.0) {
    const double sn = std::sin(s.theta);
    if (!(s.theta > 0.0 && s.theta < kPi) || sn < kPoleGuard) pole_with_spin(s.theta);
    centrifugal = kappa * kappa * std::cos(s.theta) / (sn * sn * sn);
    domain = ThetaDomain::kInterior;
  }
  const SurfaceEval e = profile.eval(s.theta, domain);
  return {s.p_theta, (centrifugal - 0.5 * e.dB * s.p_theta * s.p_theta - e.dU) / e.B};
}

ReducedRates reduced_rhs(const ReducedState& s, double kappa, const Params& p) {
  return reduced_rhs(s, kappa, EllipsoidProfile(p));
}

Integrals integrals(const FullState& s, const Params& p) {
  const Vec3 r = contact_vector_unchecked(s.gamma, p);
  const Mat3 j = inertia_about_contact(r, p);
  Integrals out;
  out.F0 = s.gamma.squaredNorm();
  out.F1 = s.omega.dot(s.gamma);
  const double g3 = std::clamp(s.gamma.z() / std::sqrt(out.F0), -1.0, 1.0);
  out.kappa = j_coefficient(g3, p) * s.omega.z();
  out.eps = 0.5 * s.omega.dot(j * s.omega) - r.dot(s.gamma);
  return out;
}

double measure_density(double gamma3, const Params& p) {
  return (1.0 / p.eta + contact_norm_sq(gamma3, p)) * j_coefficient(gamma3, p);
}

double effective_potential(double theta, double kappa, const Params& p) {
  if (kappa == 0.0) return profile(theta, p, ThetaDomain::kExtended).U;
  const double sn = std::sin(theta);
  return kappa * kappa / (2.0 * sn * sn) + profile(theta, p).U;
}

double effective_force(double theta, double kappa, const Params& p) {
  if (kappa == 0.0) return -profile(theta, p, ThetaDomain::kExtended).dU;
  const double sn = std::sin(theta);
  return kappa * kappa * std::cos(theta) / (sn * sn * sn) - profile(theta, p).dU;
}

double effective_force_slope(double theta, double kappa, const Params& p) {
  if (kappa == 0.0) return -profile(theta, p, ThetaDomain::kExtended).d2U;
  const double sn = std::sin(theta);
  const double cs = std::cos(theta);
  return -kappa * kappa * (1.0 + 2.0 * cs * cs) / (sn * sn * sn * sn) - profile(theta, p).d2U;
}

double reduced_energy(const ReducedState& s, double kappa, const Params& p) {
  const ThetaDomain domain = kappa == 0.0 ? ThetaDomain::kExtended : ThetaDomain::kInterior;
  return 0.5 * profile(s.theta, p, domain).B * s.p_theta * s.p_theta + effective_potential(s.theta, kappa, p);
}

ReducedCoordinates reduce(const FullState& s, const Params& p) {
  const Vec3 g = s.gamma.normalized();
  const double sn = std::hypot(g.x(), g.y());
  if (sn < kPoleGuard) throw Error(ErrorCode::kInvalidArgument, "reduce: state at a pole (sin theta = 0)");
  ReducedCoordinates out;
  out.state.theta = std::atan2(sn, g.z());
  out.phi = std::atan2(g.x(), g.y());
  const double j = j_coefficient(g.z(), p);
  out.kappa = j * s.omega.z();
  out.state.p_theta = s.omega.x() * std::cos(out.phi) - s.omega.y() * std::sin(out.phi);
  out.psi_rate = -out.kappa * g.z() / (j * sn * sn);
  return out;
}

FullState lift(const ReducedState& r, double kappa, double phi, const Params& p) {
  const double sn = std::sin(r.theta);
  const double cs = std::cos(r.theta);
  if (!(r.theta > 0.0 && r.theta < kPi) || sn < kPoleGuard)
    throw Error(ErrorCode::kInvalidArgument, "lift: theta must lie strictly inside (0, pi)");
  const double w3 = kappa / j_coefficient(cs, p);
  const double cot = cs / sn;
  FullState s;
  s.omega = {r.p_theta * std::cos(phi) - w3 * cot * std::sin(phi), -r.p_theta * std::sin(phi) - w3 * cot * std::cos(phi),
             w3};
  s.gamma = {sn * std::sin(phi), sn * std::cos(phi), cs};
  return s;
}

std::vector<CriticalPoint> effective_critical_points(double kappa, const Params& p) {
  std::vector<CriticalPoint> out;
  auto classify = [&](double theta) {
    CriticalPoint c;
    c.theta = theta;
    c.value = effective_potential(theta, kappa, p);
    const double slope = effective_force_slope(theta, kappa, p);
    if (std::abs(slope) > 1e-12) {
      c.maximum = slope > 0.0;  // V'' = -G0'
    } else {
      // Degenerate (boundary parameters): compare with a nearby point.
      const double probe = theta < 0.5 * kPi ? theta + 1e-3 : theta - 1e-3;
      c.maximum = c.value >= effective_potential(probe, kappa, p);
    }
    return c;
  };

  if (kappa == 0.0) out.push_back(classify(0.0));

  std::vector<double> grid(kCriticalGrid - 1);
  std::vector<double> force(kCriticalGrid - 1);
  double largest = 0.0;
  for (int i = 1; i < kCriticalGrid; ++i) {
    grid[i - 1] = kPi * i / kCriticalGrid;
    force[i - 1] = effective_force(grid[i - 1], kappa, p);
    largest = std::max(largest, std::abs(force[i - 1]));
  }
  // A force that vanishes identically (balanced sphere at kappa = 0) has no
  // isolated critical points.
  if (largest > 1e-13) {
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      if (force[i] == 0.0) {
        out.push_back(classify(grid[i]));
      } else if ((force[i] > 0.0) != (force[i + 1] > 0.0) && force[i + 1] != 0.0) {
        out.push_back(classify(refine_critical(grid[i], grid[i + 1], kappa, p)));
      }
    }
  }

  if (kappa == 0.0) out.push_back(classify(kPi));
  return out;
}

double solve_turning_point(double kappa, double eps, double lo, double hi, const Params& p) {
  auto f = [&](double t) { return effective_potential(t, kappa, p) - eps; };
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw Error(ErrorCode::kNumericalFailure, "turning point not bracketed");
  double a = lo;
  double b = hi;
  while (b - a > 1e-10) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (flo > 0.0)) {
      a = m;
      flo = fm;
    } else {
      b = m;
    }
  }
  double t = 0.5 * (a + b);
  for (int it = 0; it < 8; ++it) {
    const double slope = -effective_force(t, kappa, p);
    if (slope == 0.0) break;
    const double next = std::clamp(t - f(t) / slope, a, b);
    const double step = std::abs(next - t);
    t = next;
    if (step < 1e-15) break;
  }
  return t;
}

std::vector<LevelInterval> level_set_intervals(double kappa, double eps, const Params& p) {
  struct Node {
    double theta;
    double value;
    int side;  // +1 above eps, -1 inside, 0 degenerate minimum
    bool end;
  };
  const double tol = level_tolerance(eps);
  const auto crit = effective_critical_points(kappa, p);

  std::vector<Node> nodes;
  if (kappa != 0.0) nodes.push_back({0.0, INFINITY, +1, true});
  for (const auto& c : crit) {
    int side = c.value > eps + tol ? +1 : (c.value < eps - tol ? -1 : (c.maximum ? -1 : 0));
    const bool pole = kappa == 0.0 && (c.theta == 0.0 || c.theta == kPi);
    nodes.push_back({c.theta, c.value, side, pole});
  }
  if (kappa != 0.0) nodes.push_back({kPi, INFINITY, +1, true});
  if (nodes.empty()) {
    // kappa == 0 on the balanced sphere: U is constant.
    const double u = effective_potential(0.5 * kPi, 0.0, p);
    if (eps < u - tol) return {};
    LevelInterval all{0.0, kPi, true, true, true, std::abs(eps - u) <= tol};
    return {all};
  }

  auto crossing = [&](const Node& a, const Node& b) {
    double lo = a.theta;
    double hi = b.theta;
    // Near the poles with kappa != 0 V grows without bound; shrink the
    // bracket until V exceeds eps at the outer end.
    if (std::isinf(a.value)) {
      lo = 0.5 * hi;
      while (effective_potential(lo, kappa, p) <= eps) lo *= 0.5;
    }
    if (std::isinf(b.value)) {
      hi = kPi - 0.5 * (kPi - lo);
      while (effective_potential(hi, kappa, p) <= eps) hi = kPi - 0.5 * (kPi - hi);
    }
    return solve_turning_point(kappa, eps, lo, hi, p);
  };

  std::vector<LevelInterval> out;
  bool open = nodes.front().side < 0;
  double start = nodes.front().theta;
  if (nodes.front().side == 0) out.push_back({start, start, kappa == 0.0, false, false, true});
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const Node& a = nodes[k];
    const Node& b = nodes[k + 1];
    const int sa = a.side == 0 ? +1 : a.side;
    const int sb = b.side == 0 ? +1 : b.side;
    if (b.side == 0 && k + 2 < nodes.size()) out.push_back({b.theta, b.theta, false, false, false, true});
    if (sa > 0 && sb < 0) {
      open = true;
      start = crossing(a, b);
    } else if (sa < 0 && sb > 0) {
      out.push_back({start, crossing(a, b), false, false, false, false});
      open = false;
    }
  }
  const Node& last = nodes.back();
  if (last.side == 0 && nodes.size() > 1) out.push_back({last.theta, last.theta, false, kappa == 0.0, false, true});
  if (open) out.push_back({start, last.theta, false, false, false, false});

  if (kappa == 0.0) {
    for (auto& iv : out) {
      iv.touches_zero = iv.touches_zero || iv.lo == 0.0;
      iv.touches_pi = iv.touches_pi || iv.hi == kPi;
      iv.full_circle = iv.lo == 0.0 && iv.hi == kPi && !iv.degenerate;
    }
  }
  std::sort(out.begin(), out.end(), [](const LevelInterval& x, const LevelInterval& y) { return x.lo < y.lo; });
  return out;
}

}  // namespace rubberroll
