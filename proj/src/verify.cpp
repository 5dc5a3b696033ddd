#include "rubberroll/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "rubberroll/bifurcation.hpp"
#include "rubberroll/error.hpp"
#include "rubberroll/integrate.hpp"
#include "rubberroll/reconstruct.hpp"

namespace rubberroll {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string fmt17(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// Uniform gamma on the sphere, omega orthogonal to it with |omega| in [0.2, 2].
FullState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  Vec3 g(n(rng), n(rng), n(rng));
  g.normalize();
  Vec3 w(n(rng), n(rng), n(rng));
  w -= w.dot(g) * g;
  w *= mag(rng) / w.norm();
  return {w, g};
}

// An energy cross-check at one reduced state: the full energy of the lifted
// state against the closed reduced expression. The lift does not involve B,
// so only the correct cross term in B reproduces the full energy.
VerifyItem b_sign_arbitration(const Params& p) {
  const ReducedState r{1.0, 0.3};
  const double kappa = 0.6;
  const FullState s = lift(r, kappa, 0.0, p);
  const double full = integrals(s, p).eps;
  const double reduced = reduced_energy(r, kappa, p);
  const double diff = std::abs(full - reduced);
  return {"b_sign_energy_identity", diff <= 1e-10,
          std::string("b_sign=") + to_string(p.b_sign) + " full eps " + fmt17(full) + " reduced eps " +
              fmt17(reduced) + " |diff| " + fmt(diff) + " (limit 1e-10)"};
}

VerifyItem conservation(const Params& p, bool quick, std::mt19937_64& rng) {
  const int n = quick ? 2 : 20;
  const double t_end = quick ? 10.0 : 100.0;
  Tolerance tol;
  tol.abs = 1e-12;
  tol.rel = 1e-12;
  FullDrift worst;
  for (int k = 0; k < n; ++k) {
    const FullDrift d = integrate_full(random_state(rng), t_end, p, tol, t_end).drift;
    worst.F0 = std::max(worst.F0, d.F0);
    worst.F1 = std::max(worst.F1, d.F1);
    worst.kappa_rel = std::max(worst.kappa_rel, d.kappa_rel);
    worst.eps_rel = std::max(worst.eps_rel, d.eps_rel);
  }
  const bool ok = worst.F0 <= 1e-10 && worst.F1 <= 1e-10 && worst.kappa_rel <= 1e-8 && worst.eps_rel <= 1e-8;
  return {"conservation", ok,
          std::to_string(n) + " states, t in [0, " + fmt(t_end) + "]: max |dF0| " + fmt(worst.F0) + ", |dF1| " +
              fmt(worst.F1) + ", rel |dkappa| " + fmt(worst.kappa_rel) + ", rel |deps| " + fmt(worst.eps_rel)};
}

VerifyItem reduced_vs_full(const Params& p, bool quick, std::mt19937_64& rng) {
  const int n = quick ? 1 : 10;
  const double t_end = quick ? 10.0 : 50.0;
  const double dt = 0.25;
  std::uniform_real_distribution<double> th(0.4, kPi - 0.4), pt(-0.3, 0.3), kap(0.3, 1.5), sgn(0.0, 1.0);
  Tolerance tol;
  tol.abs = 1e-13;
  tol.rel = 1e-12;
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const ReducedState r{th(rng), pt(rng)};
    const double kappa = sgn(rng) < 0.5 ? -kap(rng) : kap(rng);
    const FullTrajectory full = integrate_full(lift(r, kappa, 0.0, p), t_end, p, tol, dt);
    ReducedVector y0 = ReducedVector::Zero();
    y0[0] = r.theta;
    y0[1] = r.p_theta;
    ReducedOptions opt;
    opt.tol = tol;
    opt.dt_out = dt;
    const ReducedTrajectory red = integrate_reduced(y0, kappa, t_end, p, opt);
    const std::size_t m = std::min(full.samples.size(), red.t.size());
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3& g = full.samples[i].state.gamma;
      const double theta_full = std::atan2(std::hypot(g.x(), g.y()), g.z());
      worst = std::max(worst, std::abs(theta_full - red.y[i][0]));
    }
  }
  return {"reduced_vs_full", worst <= 1e-6,
          std::to_string(n) + " orbits, t in [0, " + fmt(t_end) + "]: max |theta_full - theta_reduced| " +
              fmt(worst) + " (limit 1e-6)"};
}

// Central differences of rho f over the six coordinates (omega, gamma).
double divergence_rel(const FullState& s, const Params& p) {
  const double h = 1e-5;
  auto component = [&](const Eigen::Matrix<double, 6, 1>& x, int i) {
    const FullState q{x.head<3>(), x.tail<3>()};
    const FullRates f = full_rhs(q, p);
    const double g3 = std::clamp(q.gamma.z() / q.gamma.norm(), -1.0, 1.0);
    const double rho = measure_density(g3, p);
    return rho * (i < 3 ? f.omega_dot[i] : f.gamma_dot[i - 3]);
  };
  Eigen::Matrix<double, 6, 1> x;
  x << s.omega, s.gamma;
  double div = 0.0, scale = 0.0;
  for (int i = 0; i < 6; ++i) {
    auto a = x, b = x;
    a[i] += h;
    b[i] -= h;
    const double d = (component(a, i) - component(b, i)) / (2.0 * h);
    div += d;
    scale += std::abs(d);
  }
  return std::abs(div) / std::max(scale, 1e-300);
}

VerifyItem measure_divergence(const Params& p, bool quick, std::mt19937_64& rng) {
  const int n = quick ? 20 : 100;
  double worst = 0.0;
  for (int k = 0; k < n; ++k) worst = std::max(worst, divergence_rel(random_state(rng), p));
  return {"measure_divergence", worst <= 1e-6,
          std::to_string(n) + " states: max |div(rho f)| / sum |d(rho f_i)/dx_i| " + fmt(worst) + " (limit 1e-6)"};
}

VerifyItem sigma_identities(const Params& p) {
  double g0 = 0.0, k2 = 0.0, en = 0.0;
  int used = 0;
  for (int k = 1; k < 400; ++k) {
    const double t = kPi * k / 400.0;
    const auto pt = sigma_theta_point(t, p);
    if (!pt || pt->kappa == 0.0) continue;
    ++used;
    const double s = std::sin(t), c = std::cos(t);
    const SurfaceEval e = profile(t, p);
    // kappa^2 eliminated from G0 = 0.
    const double elim = s * s * s * e.dU / c;
    if (std::abs(c) > 1e-3) k2 = std::max(k2, std::abs(elim - pt->kappa * pt->kappa) / std::max(1.0, elim));
    g0 = std::max(g0, std::abs(effective_force(t, pt->kappa, p)));
    en = std::max(en, std::abs(effective_potential(t, pt->kappa, p) - pt->eps) / std::max(1.0, pt->eps));
  }
  const bool ok = used > 0 && g0 <= 1e-10 && k2 <= 1e-12 && en <= 1e-12;
  return {"sigma_theta_identities", ok,
          std::to_string(used) + " points: max |G0| " + fmt(g0) + " (limit 1e-10), kappa^2 identity " + fmt(k2) +
              ", eps identity " + fmt(en) + " (limit 1e-12)"};
}

// Bisects the sign change of lambda^2 at a vertex over beta^2 in [lo, hi].
double stability_flip(double theta, double lo, double hi, const Params& base) {
  auto l2 = [&](double b2) {
    Params q = base;
    q.beta = std::sqrt(b2);
    return linear_stability(theta, 0.0, q).lambda_sq;
  };
  const bool s_lo = l2(lo) < 0.0;
  if (s_lo == (l2(hi) < 0.0)) return NAN;
  while (hi - lo > 5e-7) {
    const double m = 0.5 * (lo + hi);
    ((l2(m) < 0.0) == s_lo ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

VerifyItem vertex_boundaries(const Params& p) {
  Params q = p;
  q.alpha = 0.5;
  const double up = stability_flip(0.0, 1.2, 1.8, q);
  const double down = stability_flip(kPi, 0.2, 0.8, q);
  const bool ok = std::abs(up - 1.5) <= 1e-6 && std::abs(down - 0.5) <= 1e-6;
  return {"vertex_stability_boundaries", ok,
          "alpha=0.5: upper vertex flips at beta^2 = " + fmt17(up) + " (expected 1.5), lower at " + fmt17(down) +
              " (expected 0.5), bracket 5e-7"};
}

// Energy threshold at alpha = 0.5, beta = 3: U at the numerically located
// inclined equilibrium against both closed forms in circulation.
VerifyItem eps_min_arbitration(const Params& p) {
  Params q = p;
  q.alpha = 0.5;
  q.beta = 3.0;
  const auto ts = inclined_equilibrium(q);
  if (!ts) return {"eps_min_arbitration", false, "no inclined equilibrium found at alpha=0.5, beta=3"};
  const double u = profile(*ts, q).U;
  const double derived = *epsilon_min_closed_form(q);
  const AlternativeClosedForms alt = alternative_closed_forms(q);
  const double printed = alt.eps_min.value_or(NAN);
  const double d_derived = std::abs(u - derived);
  const double d_printed = std::abs(u - printed);
  // The equilibrium condition itself at the printed angle.
  const double resid = alt.theta_star ? std::cos(*alt.theta_star) * (1.0 - q.beta * q.beta) +
                                            q.alpha * profile(*alt.theta_star, q).Z
                                      : NAN;
  const bool ok = d_derived <= 1e-9 && d_printed > 1e-6;
  return {"eps_min_arbitration", ok,
          "alpha=0.5, beta=3: U(theta*) = " + fmt17(u) + " at theta* = " + fmt17(*ts) +
              "; beta sqrt((beta^2-1+alpha^2)/(beta^2-1)) = " + fmt17(derived) + " (|diff| " + fmt(d_derived) +
              ", limit 1e-9); printed variant beta sqrt((1+alpha^2-beta^2)/(1-beta^2)) = " + fmt17(printed) +
              " (|diff| " + fmt(d_printed) + ", fails); printed angle " + fmt17(alt.theta_star.value_or(NAN)) +
              " leaves equilibrium residual " + fmt(resid)};
}

VerifyItem guarded(const std::string& name, const std::function<VerifyItem()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const VerifyItem& i) { return i.passed; });
}

VerifyReport run_verification(const Params& p, bool quick, std::uint64_t seed) {
  require_valid(p);
  std::mt19937_64 rng(seed);
  VerifyReport r;
  r.items.push_back(guarded("b_sign_energy_identity", [&] { return b_sign_arbitration(p); }));
  r.items.push_back(guarded("conservation", [&] { return conservation(p, quick, rng); }));
  r.items.push_back(guarded("reduced_vs_full", [&] { return reduced_vs_full(p, quick, rng); }));
  r.items.push_back(guarded("measure_divergence", [&] { return measure_divergence(p, quick, rng); }));
  r.items.push_back(guarded("sigma_theta_identities", [&] { return sigma_identities(p); }));
  r.items.push_back(guarded("vertex_stability_boundaries", [&] { return vertex_boundaries(p); }));
  r.items.push_back(guarded("eps_min_arbitration", [&] { return eps_min_arbitration(p); }));
  return r;
}

std::string format_report(const VerifyReport& r) {
  std::string out;
  for (const auto& i : r.items) out += (i.passed ? "PASS " : "FAIL ") + i.name + ": " + i.detail + "\n";
  return out;
}

}  // namespace rubberroll
