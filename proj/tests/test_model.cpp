#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "rubberroll/error.hpp"
#include "rubberroll/model.hpp"

using namespace rubberroll;

namespace {

bool has_issue(const std::vector<std::string>& v, const std::string& text) {
  for (const auto& s : v)
    if (s.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("nondimensionalize: homogeneous sphere-like body") {
  const auto n = nondimensionalize({1.0, 1.0, 0.0, 1.0, 1.0, 0.4, 0.4});
  CHECK(n.params.alpha == 0.0);
  CHECK(n.params.beta == 1.0);
  CHECK(n.params.nu == 1.0);
  CHECK(n.params.eta == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("nondimensionalize: ratios and scales") {
  const auto n = nondimensionalize({2.0, 9.81, 0.05, 0.3, 0.1, 0.02, 0.01});
  CHECK(n.params.alpha == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n.params.beta == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(n.params.nu == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n.params.eta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.scales.length == 0.1);
  CHECK(n.scales.mass == 2.0);
  CHECK(n.scales.time == doctest::Approx(std::sqrt(0.1 / 9.81)).epsilon(1e-15));
}

TEST_CASE("nondimensionalize: offset beyond the polar semiaxis is rejected") {
  try {
    nondimensionalize({1.0, 1.0, 1.5, 1.0, 1.0, 0.4, 0.4});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
    CHECK(std::string(e.what()).find("α out of [0,1]") != std::string::npos);
  }
}

TEST_CASE("nondimensionalize: inertia ratio above 2 names the bound") {
  CHECK_THROWS_WITH_AS(nondimensionalize({1.0, 1.0, 0.0, 1.0, 1.0, 0.1, 0.3}), doctest::Contains("ν out of (0,2]"),
                       Error);
  CHECK_THROWS_AS(nondimensionalize({0.0, 1.0, 0.0, 1.0, 1.0, 0.1, 0.1}), Error);
}

TEST_CASE("validate") {
  CHECK(validate(Params{0.5, 3.0, 0.5, 0.5}).empty());
  CHECK(validate(Params{0.0, 1.0, 1.0, 1.0}).empty());
  CHECK(has_issue(validate(Params{0.5, 3.0, 2.5, 0.5}), "ν out of (0,2]"));
  CHECK(has_issue(validate(Params{0.5, 0.0, 0.5, 0.5}), "β out of (0,∞)"));
  CHECK(has_issue(validate(Params{0.5, INFINITY, 0.5, 0.5}), "β out of (0,∞)"));
  CHECK(has_issue(validate(Params{-0.1, 1.0, 0.5, 0.5}), "α out of [0,1]"));
  CHECK(has_issue(validate(Params{0.5, 1.0, 0.5, NAN}), "η out of (0,∞)"));
  CHECK(validate(Params{1.2, -1.0, 3.0, 0.0}).size() == 4);
  CHECK_THROWS_AS(require_valid(Params{0.5, 3.0, 2.5, 0.5}), Error);
}

TEST_CASE("b-sign names") {
  CHECK(parse_b_sign("derived") == BSign::kDerived);
  CHECK(parse_b_sign("paper") == BSign::kPaper);
  CHECK(std::string(to_string(BSign::kPaper)) == "paper");
  CHECK_THROWS_AS(parse_b_sign("plus"), Error);
}

TEST_CASE("property: nondimensionalize is scale invariant and yields valid params") {
  rrtest::Rng g(11);
  for (int k = 0; k < 200; ++k) {
    DimensionalBody b;
    b.m = rrtest::uniform(g, 0.1, 10.0);
    b.g = rrtest::uniform(g, 1.0, 20.0);
    b.b3 = rrtest::uniform(g, 0.01, 2.0);
    b.b1 = b.b3 * rrtest::uniform(g, 0.2, 5.0);
    b.a = b.b3 * rrtest::uniform(g, 0.0, 1.0);
    b.i1 = rrtest::uniform(g, 0.01, 1.0);
    b.i3 = b.i1 * rrtest::uniform(g, 0.05, 2.0);
    const Params p = nondimensionalize(b).params;
    CHECK(validate(p).empty());

    const double c = rrtest::uniform(g, 0.1, 10.0), d = rrtest::uniform(g, 0.1, 10.0);
    DimensionalBody s = b;
    s.a *= c;
    s.b1 *= c;
    s.b3 *= c;
    s.m *= d;
    s.i1 *= d * c * c;
    s.i3 *= d * c * c;
    const Params q = nondimensionalize(s).params;
    CHECK(q.alpha == doctest::Approx(p.alpha).epsilon(1e-13));
    CHECK(q.beta == doctest::Approx(p.beta).epsilon(1e-13));
    CHECK(q.nu == doctest::Approx(p.nu).epsilon(1e-13));
    CHECK(q.eta == doctest::Approx(p.eta).epsilon(1e-13));
  }
}
