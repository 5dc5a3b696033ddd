#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "generators.hpp"
#include "rubberroll/bifurcation.hpp"
#include "rubberroll/error.hpp"
#include "rubberroll/reconstruct.hpp"

using namespace rubberroll;
using std::numbers::pi;

namespace {

const Params kC{0.5, 3.0, 0.5, 0.5};

Params with_ab(double alpha, double beta) { return {alpha, beta, 0.5, 0.5}; }

std::set<std::string> labels(const std::vector<Curve>& curves, int sign) {
  std::set<std::string> out;
  for (const auto& c : curves)
    if (c.kappa_sign == sign) out.insert(c.label);
  return out;
}

// Sign of lambda^2 at a vertex as a function of beta^2, bisected.
double vertex_boundary(double theta, double alpha, double lo, double hi) {
  auto f = [&](double b2) { return linear_stability(theta, 0.0, with_ab(alpha, std::sqrt(b2))).lambda_sq; };
  const bool flo = f(lo) < 0.0;
  REQUIRE(flo != (f(hi) < 0.0));
  while (hi - lo > 1e-7) {
    const double m = 0.5 * (lo + hi);
    ((f(m) < 0.0) == flo ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("omega0_sq") {
  const Params sphere{0.0, 1.0, 0.7, 1.3};
  for (double t : {0.3, 1.0, 2.0, 2.9}) CHECK(omega0_sq(t, sphere) == 0.0);
  const double star = *inclined_equilibrium(kC);
  CHECK(std::abs(omega0_sq(star, kC)) <= 1e-12);
  CHECK(omega0_sq(pi / 3, kC) > 0.0);
  CHECK_THROWS_AS(omega0_sq(0.0, kC), Error);
  CHECK_THROWS_AS(omega0_sq(pi / 2, kC), Error);
}

TEST_CASE("permanent rotation radii") {
  const double t = pi / 3;
  const PermanentRotation pr = permanent_rotation(t, kC);
  const SurfaceEval e = profile(t, kC);
  CHECK(pr.rho_c == doctest::Approx(e.Z * std::tan(t) + 0.5 * std::sin(t)).epsilon(1e-14));
  CHECK(std::abs(pr.rho_c - 5.015588) <= 1e-6);
  CHECK(std::abs(pr.rho_p - 5.891883) <= 1e-6);
  // The lifted state is on the level set and is a fixed point of the reduction.
  const Integrals in = integrals(pr.state, kC);
  CHECK(in.kappa == doctest::Approx(pr.kappa).epsilon(1e-13));
  CHECK(in.eps == doctest::Approx(pr.eps).epsilon(1e-13));
  CHECK(std::abs(in.F1) <= 1e-15);
  CHECK(std::abs(effective_force(t, pr.kappa, kC)) <= 1e-10);

  const PermanentRotation small = permanent_rotation(1e-5, kC);
  CHECK(small.rho_c < 1e-4);
  CHECK(small.rho_p < 1e-3);
  const PermanentRotation wide = permanent_rotation(pi / 2 + 1e-5, kC);
  CHECK(std::abs(wide.rho_c) > 1e4);
  CHECK(std::abs(wide.rho_p) > 1e4);
  // Between the inclined equilibrium and the equator no rotation exists.
  CHECK_THROWS_AS(permanent_rotation(1.45, kC), Error);
}

TEST_CASE("sigma_theta endpoint limits") {
  for (double alpha : {0.0, 0.3, 0.5}) {
    const Params p = with_ab(alpha, 3.0);
    const auto top = sigma_theta_point(1e-7, p);
    const auto bottom = sigma_theta_point(pi - 1e-7, p);
    REQUIRE(top);
    REQUIRE(bottom);
    CHECK(std::abs(top->kappa) <= 1e-6);
    CHECK(std::abs(top->eps - (1.0 + alpha)) <= 1e-6);
    CHECK(std::abs(bottom->kappa) <= 1e-6);
    CHECK(std::abs(bottom->eps - (1.0 - alpha)) <= 1e-6);
  }
  // The upper branch is missing below the upper stability boundary.
  CHECK_FALSE(sigma_theta_point(1e-3, with_ab(0.5, 1.1)));
  CHECK(sigma_theta_point(pi - 1e-3, with_ab(0.5, 1.1)));
}

TEST_CASE("property: sigma_theta points are fixed points of the reduction") {
  rrtest::Rng g(51);
  int hits = 0;
  for (int k = 0; k < 300; ++k) {
    const Params p = rrtest::params(g);
    const double t = rrtest::interior_theta(g, 1e-2);
    if (std::abs(std::cos(t)) < 1e-2) continue;
    const auto pt = sigma_theta_point(t, p);
    const double w2 = omega0_sq(t, p);
    CHECK(pt.has_value() == (w2 >= 0.0));
    if (!pt) continue;
    ++hits;
    const double scale = 1.0 + pt->kappa * pt->kappa / std::pow(std::sin(t), 3) + std::abs(profile(t, p).dU);
    CHECK(std::abs(effective_force(t, pt->kappa, p)) <= 1e-11 * scale);
    CHECK(pt->eps == doctest::Approx(effective_potential(t, pt->kappa, p)).epsilon(1e-12));
    const PermanentRotation pr = permanent_rotation(t, p);
    CHECK(pr.kappa == doctest::Approx(pt->kappa).epsilon(1e-10));
    CHECK(pr.eps == doctest::Approx(pt->eps).epsilon(1e-10));
  }
  CHECK(hits > 50);
}

TEST_CASE("property: balanced body curves are symmetric under theta -> pi - theta") {
  rrtest::Rng g(52);
  for (int k = 0; k < 100; ++k) {
    Params p = rrtest::params(g);
    p.alpha = 0.0;
    const double t = rrtest::interior_theta(g, 1e-2);
    const auto a = sigma_theta_point(t, p), b = sigma_theta_point(pi - t, p);
    REQUIRE(a.has_value() == b.has_value());
    if (!a) continue;
    CHECK(a->kappa == doctest::Approx(b->kappa).epsilon(1e-12));
    CHECK(a->eps == doctest::Approx(b->eps).epsilon(1e-12));
  }
}

TEST_CASE("equator parabola") {
  const Params e = with_ab(0.0, 1.5);
  const Curve c = equator_parabola(e);
  CHECK(c.label == "sigma_pi2");
  CHECK(c.samples.front().kappa == 0.0);
  CHECK(c.samples.front().eps == 1.5);
  for (const auto& s : c.samples) CHECK(s.eps == doctest::Approx(0.5 * s.kappa * s.kappa + 1.5).epsilon(1e-15));
  const double kc = std::sqrt((1.5 * 1.5 - 1.0) / 1.5);
  CHECK(std::abs(kc - 0.912871) <= 1e-6);
  for (const auto& s : c.samples) {
    if (s.kappa < kc - 1e-9) CHECK(s.stability == Stability::kSaddle);
    if (s.kappa > kc + 1e-9) CHECK(s.stability == Stability::kCenter);
  }
  CHECK(std::any_of(c.samples.begin(), c.samples.end(), [&](const CurveSample& s) { return s.kappa == kc; }));
  CHECK(effective_potential(pi / 2, 1.0, e) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(equator_parabola(kC), Error);
}

TEST_CASE("pitchfork at kappa_c for the balanced body") {
  const Params e = with_ab(0.0, 1.5);
  const double kc = std::sqrt((1.5 * 1.5 - 1.0) / 1.5);
  CHECK(reduced_fixed_points(kc - 1e-3, e).size() == 3);
  CHECK(reduced_fixed_points(kc + 1e-3, e).size() == 1);
  // lambda^2 at the equator crosses zero exactly at kappa_c.
  CHECK(linear_stability(pi / 2, kc - 1e-9, e).type == Stability::kSaddle);
  CHECK(linear_stability(pi / 2, kc + 1e-9, e).type == Stability::kCenter);
}

TEST_CASE("linear stability at the vertices") {
  const Params b = with_ab(0.5, 1.1);
  CHECK(linear_stability(pi, 0.0, b).type == Stability::kCenter);
  CHECK(linear_stability(0.0, 0.0, b).type == Stability::kSaddle);
  CHECK_THROWS_AS(linear_stability(0.0, 0.4, b), Error);
  try {
    linear_stability(1.0, 0.4, b);
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kNotFixedPoint);
  }
  // Boundaries in beta^2: upper vertex 1 + alpha, lower vertex 1 - alpha.
  CHECK(std::abs(vertex_boundary(0.0, 0.5, 1.0, 2.0) - 1.5) <= 1e-6);
  CHECK(std::abs(vertex_boundary(pi, 0.5, 0.1, 1.0) - 0.5) <= 1e-6);
}

TEST_CASE("inclined equilibrium") {
  const double star = *inclined_equilibrium(kC);
  CHECK(std::cos(star) == doctest::Approx(1.5 / std::sqrt(8.0 * 8.25)).epsilon(1e-12));
  CHECK(std::abs(std::cos(star) - 0.18464) <= 1e-5);
  CHECK(std::abs(std::cos(star) * (1.0 - 9.0) + 0.5 * profile(star, kC).Z) <= 1e-12);
  CHECK(star == doctest::Approx(*inclined_equilibrium_closed_form(kC)).epsilon(1e-12));
  CHECK(std::abs(star - 1.3850935870) <= 1e-9);

  const Params a = with_ab(0.5, 0.5);
  const double star_a = *inclined_equilibrium(a);
  CHECK(std::cos(star_a) == doctest::Approx(-0.25 / std::sqrt(0.75 * 0.5)).epsilon(1e-12));
  CHECK(star_a == doctest::Approx(*inclined_equilibrium_closed_form(a)).epsilon(1e-12));

  CHECK(*inclined_equilibrium(with_ab(0.0, 1.5)) == doctest::Approx(pi / 2).epsilon(1e-13));
  CHECK_FALSE(inclined_equilibrium(with_ab(0.0, 1.0)));
  CHECK_FALSE(inclined_equilibrium(with_ab(0.5, 1.1)));

  // The alternative printed forms miss the equilibrium condition.
  const AlternativeClosedForms alt = alternative_closed_forms(kC);
  REQUIRE(alt.theta_star);
  REQUIRE(alt.eps_min);
  CHECK(std::abs(*alt.theta_star - 1.379125) <= 1e-6);
  CHECK(std::abs(*alt.eps_min - 2.952753) <= 1e-6);
  CHECK(std::abs(std::cos(*alt.theta_star) * (1.0 - 9.0) + 0.5 * profile(*alt.theta_star, kC).Z) > 1e-2);
}

TEST_CASE("cusp") {
  const auto c = cusp(kC);
  REQUIRE(c);
  CHECK(c->theta > 0.0);
  CHECK(c->theta < *inclined_equilibrium(kC));
  CHECK(std::abs(c->theta - 1.11320614) <= 1e-8);
  CHECK(std::abs(c->kappa - 1.08022057) <= 1e-8);
  CHECK(std::abs(c->eps - 3.67319836) <= 1e-8);
  CHECK(std::abs(effective_force(c->theta, c->kappa, kC)) <= 1e-10);
  CHECK(std::abs(effective_force_slope(c->theta, c->kappa, kC)) <= 1e-10);

  // Born at the upper vertex as beta^2 passes 1 + alpha.
  const auto born = cusp(with_ab(0.5, std::sqrt(1.5 + 1e-6)));
  REQUIRE(born);
  CHECK(born->theta < 1e-2);
  CHECK(born->kappa < 1e-3);
  CHECK_FALSE(cusp(with_ab(0.5, 1.1)));
  CHECK_FALSE(cusp(with_ab(0.0, 3.0)));
}

TEST_CASE("diagram types") {
  CHECK(diagram_type(with_ab(0.5, 0.5)) == DiagramType::kA);
  CHECK(diagram_type(with_ab(0.5, 1.1)) == DiagramType::kB);
  CHECK(diagram_type(with_ab(0.5, 3.0)) == DiagramType::kC);
  CHECK(diagram_type(with_ab(0.0, 0.5)) == DiagramType::kD);
  CHECK(diagram_type(with_ab(0.0, 1.5)) == DiagramType::kE);
  bool edge = false;
  CHECK(diagram_type(with_ab(0.0, 1.0), &edge) == DiagramType::kE);
  CHECK(edge);
  diagram_type(with_ab(0.5, 3.0), &edge);
  CHECK_FALSE(edge);
  diagram_type(with_ab(0.5, std::sqrt(1.5)), &edge);
  CHECK(edge);
}

TEST_CASE("diagram curves per type") {
  using S = std::set<std::string>;
  CHECK(labels(diagram(with_ab(0.5, 0.5)).curves, 1) == S{"sigma_spi"});
  CHECK(labels(diagram(with_ab(0.5, 1.1)).curves, 1) == S{"sigma_spi"});
  CHECK(labels(diagram(kC).curves, 1) == S{"sigma_s0", "sigma_u", "sigma_spi"});
  CHECK(labels(diagram(kC).curves, -1) == S{"sigma_s0", "sigma_u", "sigma_spi"});
  CHECK(labels(diagram(with_ab(0.0, 0.5)).curves, 1) == S{"sigma_pi2"});
  CHECK(labels(diagram(with_ab(0.0, 1.5)).curves, 1) == S{"sigma_s0", "sigma_spi", "sigma_pi2"});
  const BifurcationDiagram sphere = diagram(with_ab(0.0, 1.0));
  CHECK(sphere.boundary);
  CHECK(labels(sphere.curves, 1) == S{"sigma_pi2"});
}

TEST_CASE("diagram samples: spacing, stability labels and mirror images") {
  CurveOptions opt;
  opt.max_arc = 1e-2;
  const BifurcationDiagram d = diagram(kC, opt);
  CHECK(d.cusp);
  CHECK(d.theta_star);
  CHECK(std::abs(d.eps_min - 3.0465144017) <= 1e-9);
  std::vector<const Curve*> pos, neg;
  for (const auto& c : d.curves) {
    (c.kappa_sign > 0 ? pos : neg).push_back(&c);
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
      CHECK(std::hypot(c.samples[i].kappa - c.samples[i - 1].kappa, c.samples[i].eps - c.samples[i - 1].eps) <=
            opt.max_arc * (1 + 1e-12));
    }
    for (const auto& s : c.samples) {
      CHECK(std::abs(s.kappa) <= opt.kappa_window);
      CHECK(s.eps <= opt.eps_window);
    }
    const bool center = c.label != "sigma_u";
    for (std::size_t i = 1; i + 1 < c.samples.size(); ++i)
      CHECK((c.samples[i].stability == Stability::kCenter) == center);
  }
  REQUIRE(pos.size() == neg.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    REQUIRE(pos[i]->samples.size() == neg[i]->samples.size());
    CHECK(pos[i]->label == neg[i]->label);
    for (std::size_t j = 0; j < pos[i]->samples.size(); ++j)
      CHECK(neg[i]->samples[j].kappa == -pos[i]->samples[j].kappa);
  }
  // sigma_u touches the cusp.
  for (const auto* c : pos) {
    if (c->label != "sigma_u") continue;
    const bool touches = c->samples.front().theta0 == d.cusp->theta || c->samples.back().theta0 == d.cusp->theta;
    CHECK(touches);
  }
}

TEST_CASE("diagram singular points") {
  const BifurcationDiagram b = diagram(with_ab(0.5, 1.1));
  REQUIRE(b.points.size() >= 2);
  CHECK(b.points[0].label == "sigma_0");
  CHECK(b.points[0].isolated);
  CHECK_FALSE(b.points[0].stable);
  CHECK(b.points[0].eps == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(b.points[1].label == "sigma_pi");
  CHECK_FALSE(b.points[1].isolated);
  CHECK(b.points[1].stable);
  CHECK(b.points[1].eps == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("connected components") {
  CHECK(connected_components(0.8, 0.1, kC).count == 0);
  CHECK(connected_components(0.0, 0.4, kC).count == 0);

  // Between the upper well and the barrier the level set has two pieces.
  const double kappa = 0.9;
  const auto fps = reduced_fixed_points(kappa, kC);
  REQUIRE(fps.size() == 3);
  CHECK(fps[0].stability.type == Stability::kCenter);
  CHECK(fps[1].stability.type == Stability::kSaddle);
  CHECK(fps[2].stability.type == Stability::kCenter);
  const double eps = 0.5 * (std::max(fps[0].eps, fps[2].eps) + fps[1].eps);
  const Components two = connected_components(kappa, eps, kC);
  CHECK(two.count == 2);
  CHECK(two.intervals[0].hi < fps[1].theta);
  CHECK(two.intervals[1].lo > fps[1].theta);
  CHECK(connected_components(kappa, fps[1].eps + 0.1, kC).count == 1);

  const Components roll = connected_components(0.0, 3.2, kC);
  REQUIRE(roll.count == 1);
  CHECK(roll.intervals[0].full_circle);
  CHECK(roll.intervals[0].touches_zero);
  CHECK(roll.intervals[0].touches_pi);
  const Components lib = connected_components(0.0, 1.0, kC);
  REQUIRE(lib.count == 1);
  CHECK_FALSE(lib.intervals[0].full_circle);
  CHECK(lib.intervals[0].touches_pi);
}
