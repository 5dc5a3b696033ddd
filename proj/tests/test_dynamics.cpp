#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "rubberroll/bifurcation.hpp"
#include "rubberroll/dynamics.hpp"
#include "rubberroll/error.hpp"
#include "rubberroll/integrate.hpp"

using namespace rubberroll;
using std::numbers::pi;

namespace {

const Params kC{0.5, 3.0, 0.5, 0.5};

// Central-difference divergence of rho f over (omega, gamma), relative to the
// sum of the magnitudes of its terms.
template <class Density>
double relative_divergence(const FullState& s, const Params& p, Density rho) {
  const double h = 1e-5;
  auto comp = [&](const Eigen::Matrix<double, 6, 1>& x, int i) {
    const FullState q{x.head<3>(), x.tail<3>()};
    const FullRates f = full_rhs(q, p);
    return rho(q) * (i < 3 ? f.omega_dot[i] : f.gamma_dot[i - 3]);
  };
  Eigen::Matrix<double, 6, 1> x;
  x << s.omega, s.gamma;
  double div = 0.0, scale = 0.0;
  for (int i = 0; i < 6; ++i) {
    auto a = x, b = x;
    a[i] += h;
    b[i] -= h;
    const double d = (comp(a, i) - comp(b, i)) / (2 * h);
    div += d;
    scale += std::abs(d);
  }
  return std::abs(div) / scale;
}

}  // namespace

TEST_CASE("full_rhs: vertex equilibrium") {
  rrtest::Rng g(31);
  for (int k = 0; k < 20; ++k) {
    const Params p = rrtest::params(g);
    const FullRates r = full_rhs({Vec3::Zero(), Vec3::UnitZ()}, p);
    CHECK(r.omega_dot.norm() <= 1e-15);
    CHECK(r.gamma_dot.norm() == 0.0);
  }
}

TEST_CASE("full_rhs: inclined equilibrium is at rest") {
  const double ts = *inclined_equilibrium(kC);
  const FullRates r = full_rhs({Vec3::Zero(), Vec3(std::sin(ts), 0.0, std::cos(ts))}, kC);
  CHECK(r.omega_dot.norm() <= 1e-12);
  // A nearby inclination is not an equilibrium.
  const FullRates off = full_rhs({Vec3::Zero(), Vec3(std::sin(ts + 0.05), 0.0, std::cos(ts + 0.05))}, kC);
  CHECK(off.omega_dot.norm() > 1e-4);
}

TEST_CASE("property: the no-spin constraint is preserved by the vector field") {
  rrtest::Rng g(32);
  for (int k = 0; k < 200; ++k) {
    const Params p = rrtest::params(g);
    const FullState s = rrtest::state(g);
    const FullRates r = full_rhs(s, p);
    CHECK(std::abs(r.omega_dot.dot(s.gamma) + s.omega.dot(r.gamma_dot)) <= 1e-12 * std::max(1.0, r.omega_dot.norm()));
    CHECK(std::abs(r.gamma_dot.dot(s.gamma)) <= 1e-14);
  }
}

TEST_CASE("reduced_rhs: printed cases") {
  const ReducedRates r = reduced_rhs({pi / 2, 0.0}, 0.0, kC);
  CHECK(r.theta_dot == 0.0);
  CHECK(r.p_theta_dot == doctest::Approx(0.5 / 11.25).epsilon(1e-14));
  CHECK(r.p_theta_dot > 0.0);

  const Params sphere{0.0, 1.0, 0.7, 1.3};
  for (double t : {0.2, 1.0, 2.5})
    CHECK(std::abs(reduced_rhs({t, 0.0}, 0.0, sphere).p_theta_dot) <= 1e-15);

  for (double t0 : {0.3, 0.6, 1.0, 1.8, 2.5}) {
    const auto pt = sigma_theta_point(t0, kC);
    REQUIRE(pt);
    CHECK(std::abs(reduced_rhs({t0, 0.0}, pt->kappa, kC).p_theta_dot) <= 1e-12);
  }
}

TEST_CASE("reduced_rhs: pole with spin is an error, kappa = 0 passes the pole") {
  CHECK_THROWS_WITH_AS(reduced_rhs({0.0, 1.0}, 0.3, kC), doctest::Contains("pole reached with nonzero κ"), Error);
  CHECK_THROWS_AS(reduced_rhs({pi, 1.0}, -0.3, kC), Error);
  try {
    reduced_rhs({1e-14, 1.0}, 0.3, kC);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumericalFailure);
  }
  CHECK(std::isfinite(reduced_rhs({0.0, 1.0}, 0.0, kC).p_theta_dot));
  CHECK(std::isfinite(reduced_rhs({-0.4, 1.0}, 0.0, kC).p_theta_dot));
}

TEST_CASE("integrals at the vertices") {
  const Integrals up = integrals({Vec3::Zero(), Vec3::UnitZ()}, kC);
  CHECK(up.F0 == 1.0);
  CHECK(up.F1 == 0.0);
  CHECK(up.kappa == 0.0);
  CHECK(up.eps == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(integrals({Vec3::Zero(), -Vec3::UnitZ()}, kC).eps == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("property: full and reduced energy agree on lifted states") {
  rrtest::Rng g(33);
  for (int k = 0; k < 300; ++k) {
    const Params p = rrtest::params(g);
    const ReducedState r{rrtest::interior_theta(g), rrtest::uniform(g, -2.0, 2.0)};
    const double kappa = rrtest::uniform(g, -2.0, 2.0);
    const double phi = rrtest::uniform(g, -pi, pi);
    const FullState s = lift(r, kappa, phi, p);
    const Integrals i = integrals(s, p);
    CHECK(i.F0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(i.F1) <= 1e-12 * std::max(1.0, s.omega.norm()));
    CHECK(i.kappa == doctest::Approx(kappa).epsilon(1e-12));
    CHECK(i.eps == doctest::Approx(reduced_energy(r, kappa, p)).epsilon(1e-12));
  }
}

TEST_CASE("measure_density") {
  const Params sphere{0.0, 1.0, 0.5, 2.0};
  for (double g3 : {-1.0, -0.3, 0.4, 1.0})
    CHECK(measure_density(g3, sphere) ==
          doctest::Approx((1 / 2.0 + 1.0) * std::sqrt((g3 * g3 + 0.5 * (1 - g3 * g3)) / 2.0 + 1.0)).epsilon(1e-14));
  const Params balanced{0.0, 2.0, 0.5, 0.5};
  CHECK(measure_density(1.0, balanced) == doctest::Approx(measure_density(-1.0, balanced)).epsilon(1e-15));
}

TEST_CASE("property: the density makes the full flow volume preserving") {
  rrtest::Rng g(34);
  int nontrivial = 0;
  for (int k = 0; k < 100; ++k) {
    const Params p = k < 50 ? kC : rrtest::params(g);
    const FullState s = rrtest::state(g);
    const double d = relative_divergence(s, p, [&](const FullState& q) {
      return measure_density(std::clamp(q.gamma.z() / q.gamma.norm(), -1.0, 1.0), p);
    });
    CHECK(d <= 1e-6);
    // Without the density the flow compresses volume somewhere.
    if (relative_divergence(s, p, [](const FullState&) { return 1.0; }) > 1e-4) ++nontrivial;
  }
  CHECK(nontrivial > 50);
}

TEST_CASE("reduce and lift") {
  const double t0 = 0.8;
  const ReducedCoordinates rc = reduce({Vec3::Zero(), Vec3(0.0, std::sin(t0), std::cos(t0))}, kC);
  CHECK(rc.phi == 0.0);
  CHECK(rc.state.theta == doctest::Approx(t0).epsilon(1e-15));

  const FullState l = lift({pi / 2, 0.0}, 0.0, 0.0, kC);
  CHECK(l.omega.norm() == 0.0);
  CHECK(std::abs(l.gamma.x()) <= 1e-15);
  CHECK(l.gamma.y() == doctest::Approx(1.0));
  CHECK(std::abs(l.gamma.z()) <= 1e-15);

  const PermanentRotation pr = permanent_rotation(pi / 3, kC);
  const ReducedCoordinates at = reduce(pr.state, kC);
  CHECK(std::abs(at.state.p_theta) <= 1e-12);
  CHECK(at.kappa == doctest::Approx(pr.kappa).epsilon(1e-12));

  CHECK_THROWS_AS(reduce({Vec3::Zero(), Vec3::UnitZ()}, kC), Error);
}

TEST_CASE("property: lift and reduce are inverse") {
  rrtest::Rng g(35);
  for (int k = 0; k < 200; ++k) {
    const Params p = rrtest::params(g);
    FullState s = rrtest::state(g);
    if (std::abs(s.gamma.z()) > 0.999) continue;
    const ReducedCoordinates rc = reduce(s, p);
    const FullState back = lift(rc.state, rc.kappa, rc.phi, p);
    CHECK((back.omega - s.omega).norm() <= 1e-12 * std::max(1.0, s.omega.norm()));
    CHECK((back.gamma - s.gamma).norm() <= 1e-13);
  }
}

TEST_CASE("property: G0 is minus the slope of V and its derivative matches differences") {
  rrtest::Rng g(36);
  for (int k = 0; k < 200; ++k) {
    const Params p = rrtest::params(g);
    const double t = rrtest::interior_theta(g, 0.1);
    const double kappa = k % 4 == 0 ? 0.0 : rrtest::uniform(g, -2.0, 2.0);
    const double h = 1e-6;
    const double dv = (effective_potential(t + h, kappa, p) - effective_potential(t - h, kappa, p)) / (2 * h);
    const double g0 = effective_force(t, kappa, p);
    CHECK(std::abs(-dv - g0) <= 1e-6 * std::max(1.0, std::abs(g0)));
    const double dg = (effective_force(t + h, kappa, p) - effective_force(t - h, kappa, p)) / (2 * h);
    const double slope = effective_force_slope(t, kappa, p);
    CHECK(std::abs(dg - slope) <= 1e-6 * std::max(1.0, std::abs(slope)));
  }
}

TEST_CASE("level sets of the effective potential") {
  // Below the minimum: empty.
  CHECK(level_set_intervals(0.5, 0.1, kC).empty());
  // Meridian motion above the threshold rolls over both vertices.
  const auto roll = level_set_intervals(0.0, 3.2, kC);
  REQUIRE(roll.size() == 1);
  CHECK(roll[0].full_circle);
  // Meridian libration below it passes through the lower vertex.
  const auto lib = level_set_intervals(0.0, 1.0, kC);
  REQUIRE(lib.size() == 1);
  CHECK(lib[0].touches_pi);
  CHECK_FALSE(lib[0].full_circle);
  // Interval ends are turning points.
  const auto iv = level_set_intervals(0.8, 3.64, kC);
  REQUIRE(iv.size() == 1);
  CHECK(effective_potential(iv[0].lo, 0.8, kC) == doctest::Approx(3.64).epsilon(1e-12));
  CHECK(effective_potential(iv[0].hi, 0.8, kC) == doctest::Approx(3.64).epsilon(1e-12));
  const double tp = solve_turning_point(0.8, 3.64, 0.2, 1.0, kC);
  CHECK(tp == doctest::Approx(iv[0].lo).epsilon(1e-12));
}

TEST_CASE("effective critical points") {
  // Two wells and a saddle just above kappa = 0.5 on the type-c body.
  const auto cps = effective_critical_points(0.5, kC);
  int maxima = 0;
  for (const auto& c : cps) {
    CHECK(std::abs(effective_force(c.theta, 0.5, kC)) <= 1e-9);
    maxima += c.maximum;
  }
  CHECK(cps.size() == 3);
  CHECK(maxima == 1);
  // kappa = 0 includes the vertices.
  const auto zero = effective_critical_points(0.0, kC);
  REQUIRE(zero.size() >= 2);
  CHECK(zero.front().theta == 0.0);
  CHECK(zero.back().theta == pi);
}

TEST_CASE("check_invariants") {
  CHECK_NOTHROW(check_invariants({Vec3(1, 0, 0), Vec3(0, 0, 1)}));
  CHECK_THROWS_AS(check_invariants({Vec3(0, 0, 1), Vec3(0, 0, 1)}), Error);
  CHECK_THROWS_AS(check_invariants({Vec3::Zero(), Vec3(0, 0, 1.1)}), Error);
}
