#include "rubberroll/reconstruct.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "dop853.hpp"
#include "rubberroll/error.hpp"

namespace rubberroll {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double unwrap(double angle, double previous) {
  return angle + kTwoPi * std::round((previous - angle) / kTwoPi);
}

void fill_contact(AbsoluteSample& s, const Params& p) {
  const double sn = std::sin(s.theta);
  const Vec3 gamma(sn * std::sin(s.phi), sn * std::cos(s.phi), std::cos(s.theta));
  const Vec3 r = contact_vector_unchecked(gamma, p);
  const Mat3 q = euler_matrix(s.psi, s.theta, s.phi);
  s.x_p = s.x_c + r.dot(q.col(0));
  s.y_p = s.y_c + r.dot(q.col(1));
}

// Levels of the critical points of V on this kappa slice, ascending, deduplicated.
std::vector<double> critical_levels(double kappa, const Params& p) {
  std::vector<double> levels;
  for (const auto& c : effective_critical_points(kappa, p)) levels.push_back(c.value);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }),
               levels.end());
  return levels;
}

RotationNumber rotation_number_once(double kappa, double eps, int branch, const Params& p, const Tolerance& tol);

// N without the error estimate (one period only).
double quick_N(double kappa, double eps, int branch, const Params& p, const Tolerance& tol) {
  return rotation_number_once(kappa, eps, branch, p, tol).N;
}

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&, j] {
      try {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Sample positions inside a segment of a kappa slice: dense near the ends
// where N varies logarithmically.
std::vector<double> slice_grid(bool cluster_top) {
  std::vector<double> u = {1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 0.01, 0.02, 0.035};
  for (int k = 1; k < 20; ++k) u.push_back(0.05 * k);
  if (cluster_top)
    for (double v : {0.035, 0.02, 0.01, 3e-3, 1e-3, 1e-4, 1e-5, 1e-6}) u.push_back(1.0 - v);
  return u;
}

}  // namespace

QuadratureRates quadrature_rates(double theta, double kappa, const Params& p) {
  const double sn = std::sin(theta);
  if (!(theta > 0.0 && theta < kPi) || sn < 1e-12)
    throw Error(ErrorCode::kInvalidArgument, "quadrature_rates: theta at a pole");
  const double j = profile(theta, p).J;
  QuadratureRates q;
  q.omega3 = kappa / j;
  q.phi_dot = q.omega3 / (sn * sn);
  q.psi_dot = -kappa * std::cos(theta) / (j * sn * sn);
  return q;
}

Mat3 euler_matrix(double psi, double theta, double phi) {
  const double cps = std::cos(psi), sps = std::sin(psi);
  const double cth = std::cos(theta), sth = std::sin(theta);
  const double cph = std::cos(phi), sph = std::sin(phi);
  Mat3 q;
  q << cps * cph - cth * sps * sph, sps * cph + cth * cps * sph, sph * sth,
      -cps * sph - cth * sps * cph, -sps * sph + cth * cps * cph, cph * sth,
      sth * sps, -sth * cps, cth;
  return q;
}

AbsoluteTrajectory reconstruct_trajectory(const ReducedState& init, double kappa, double t_end, const Params& p,
                                          const AbsoluteInit& at, const Tolerance& tol, double dt_out) {
  ReducedVector y0;
  y0 << init.theta, init.p_theta, at.psi0, at.phi0, at.x0, at.y0;
  ReducedOptions opt;
  opt.tol = tol;
  opt.dt_out = dt_out;
  const ReducedTrajectory tr = integrate_reduced(y0, kappa, t_end, p, opt);

  AbsoluteTrajectory out;
  out.steps = tr.steps;
  out.max_eps_drift = tr.max_eps_drift;
  for (const auto& ev : tr.poles) out.pole_times.push_back(ev.t);
  out.samples.reserve(tr.t.size());
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const ReducedVector y = fold_meridian(tr.y[i]);
    AbsoluteSample s;
    s.t = tr.t[i];
    s.theta = y[0];
    s.p_theta = y[1];
    s.psi = y[2];
    s.phi = y[3];
    s.x_c = y[4];
    s.y_c = y[5];
    s.z_c = profile(s.theta, p, ThetaDomain::kExtended).U;
    s.eps_drift = reduced_energy({tr.y[i][0], tr.y[i][1]}, kappa, p) - tr.eps0;
    if (std::sin(s.theta) > 1e-12) {
      const FullState f = lift({s.theta, s.p_theta}, kappa, s.phi, p);
      s.f1_drift = f.omega.dot(f.gamma);
      out.max_f1_drift = std::max(out.max_f1_drift, std::abs(s.f1_drift));
    }
    fill_contact(s, p);
    out.samples.push_back(s);
  }
  return out;
}

AbsoluteTrajectory integrate_kinematics(const FullState& init, double t_end, const Params& p, const AbsoluteInit& at,
                                        const Tolerance& tol, double dt_out) {
  require_valid(p);
  check_invariants(init);
  using V14 = Eigen::Matrix<double, 14, 1>;
  const Vec3 g0 = init.gamma;
  const double theta0 = std::atan2(std::hypot(g0.x(), g0.y()), g0.z());
  const double phi0 = std::atan2(g0.x(), g0.y());
  const Mat3 q0 = euler_matrix(at.psi0, theta0, phi0);
  V14 y0;
  y0 << init.omega, init.gamma, q0.col(0), q0.col(1), at.x0, at.y0;

  detail::Dop853<14> st([&p](double, const V14& y) {
    const FullState s{y.segment<3>(0), y.segment<3>(3)};
    const FullRates r = full_rhs(s, p);
    const Vec3 w = s.omega;
    const Vec3 a = y.segment<3>(6);
    const Vec3 b = y.segment<3>(9);
    const Vec3 v = contact_vector_unchecked(s.gamma, p).cross(w);  // velocity of the center of mass
    V14 d;
    d << r.omega_dot, r.gamma_dot, a.cross(w), b.cross(w), v.dot(a), v.dot(b);
    return d;
  }, tol);

  const Integrals i0 = integrals(init, p);
  AbsoluteTrajectory out;
  double prev_psi = at.psi0;
  double prev_phi = phi0;
  auto emit = [&](double t, const V14& y) {
    const Vec3 w = y.segment<3>(0);
    const Vec3 g = y.segment<3>(3).normalized();
    const Vec3 a = y.segment<3>(6);
    const Vec3 b = y.segment<3>(9);
    AbsoluteSample s;
    s.t = t;
    s.theta = std::atan2(std::hypot(g.x(), g.y()), g.z());
    s.phi = unwrap(std::atan2(g.x(), g.y()), prev_phi);
    s.psi = unwrap(std::atan2(a.z(), -b.z()), prev_psi);
    prev_phi = s.phi;
    prev_psi = s.psi;
    s.p_theta = w.x() * std::cos(s.phi) - w.y() * std::sin(s.phi);
    s.x_c = y[12];
    s.y_c = y[13];
    const Vec3 r = contact_vector_unchecked(g, p);
    s.z_c = -r.dot(g);
    s.x_p = s.x_c + r.dot(a);
    s.y_p = s.y_c + r.dot(b);
    const Integrals now = integrals({w, g}, p);
    s.eps_drift = now.eps - i0.eps;
    s.f1_drift = now.F1;
    out.max_eps_drift = std::max(out.max_eps_drift, std::abs(s.eps_drift) / std::max(1.0, std::abs(i0.eps)));
    out.max_f1_drift = std::max(out.max_f1_drift, std::abs(now.F1));
    out.max_kappa_drift =
        std::max(out.max_kappa_drift, std::abs(now.kappa - i0.kappa) / std::max(1.0, std::abs(i0.kappa)));
    out.samples.push_back(s);
  };

  const double dir = t_end >= 0.0 ? 1.0 : -1.0;
  st.start(0.0, y0, dir, std::max(std::abs(t_end), 1e-12));
  emit(0.0, y0);
  long next_out = 1;
  bool done = t_end == 0.0;
  while (!done) {
    done = st.step(t_end);
    if (dt_out > 0.0) {
      for (;;) {
        const double to = dir * dt_out * static_cast<double>(next_out);
        if ((to - st.t()) * dir > 0.0) break;
        emit(to, st.dense(to));
        ++next_out;
      }
    }
    V14 y = st.y();
    const double n = y.segment<3>(3).norm();
    out.max_renormalization = std::max(out.max_renormalization, std::abs(n - 1.0));
    y.segment<3>(3) /= n;
    st.replace_state(y);
    if (dt_out <= 0.0) emit(st.t(), y);
  }
  if (dt_out > 0.0 && out.samples.back().t != st.t()) emit(st.t(), st.y());
  out.steps = st.accepted();
  return out;
}

namespace {

RotationNumber rotation_number_once(double kappa, double eps, int branch, const Params& p, const Tolerance& tol) {
  const SectionPeriod sp = section_period(kappa, eps, branch, p, tol);
  RotationNumber out;
  if (sp.fixed_point) {
    out.fixed_point = true;
    if (kappa == 0.0) return out;
    const double theta = sp.theta_min;
    const double lambda_sq = effective_force_slope(theta, kappa, p) / profile(theta, p).B;
    if (lambda_sq >= 0.0)
      throw Error(ErrorCode::kNumericalFailure, "rotation number undefined at an unstable fixed point");
    const double omega_theta = std::sqrt(-lambda_sq);
    out.N = -quadrature_rates(theta, kappa, p).psi_dot / omega_theta;
    out.T = 0.0;
    return out;
  }
  out.T = sp.T;
  out.drift = sp.drift;
  if (kappa == 0.0) return out;  // psi is constant on meridian motions
  out.N = -sp.psi_advance / kTwoPi;
  return out;
}

}  // namespace

// The error bar is the change of N under a tenfold looser tolerance.
RotationNumber rotation_number(double kappa, double eps, int branch, const Params& p, const Tolerance& tol) {
  RotationNumber r = rotation_number_once(kappa, eps, branch, p, tol);
  if (r.fixed_point || kappa == 0.0) {
    r.N_err = 1e-12;
    return r;
  }
  Tolerance coarse = tol;
  coarse.abs *= 10.0;
  coarse.rel *= 10.0;
  const double n2 = rotation_number_once(kappa, eps, branch, p, coarse).N;
  r.N_err = std::max(std::abs(r.N - n2), 1e-14);
  return r;
}

const char* to_string(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::kPoint:
      return "Point";
    case TrajectoryClass::kCircle:
      return "Circle";
    case TrajectoryClass::kUnboundedLine:
      return "UnboundedLine";
    case TrajectoryClass::kSegment:
      return "Segment";
    case TrajectoryClass::kUnboundedResonant:
      return "UnboundedResonant";
    case TrajectoryClass::kClosedPeriodic:
      return "ClosedPeriodic";
    case TrajectoryClass::kQuasiPeriodicBounded:
      return "QuasiPeriodicBounded";
    case TrajectoryClass::kAsymptoticToCircles:
      return "AsymptoticToCircles";
    case TrajectoryClass::kAsymptoticToLines:
      return "AsymptoticToLines";
  }
  return "?";
}

std::optional<std::pair<long, long>> rational_approximation(double x, double tol, int q_max) {
  long h1 = 1, h2 = 0, k1 = 0, k2 = 1;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(v);
    if (std::abs(a) > 1e12) break;
    const long ai = static_cast<long>(a);
    const long h = ai * h1 + h2;
    const long k = ai * k1 + k2;
    if (k > q_max) break;
    if (std::abs(x - static_cast<double>(h) / static_cast<double>(k)) <= tol) return std::make_pair(h, k);
    const double frac = v - a;
    if (frac < 1e-15) break;
    v = 1.0 / frac;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
  }
  return std::nullopt;
}

Classification classify(double kappa, double eps, int branch, const Params& p, const ClassifyOptions& opt) {
  require_valid(p);
  const auto intervals = level_set_intervals(kappa, eps, p);
  if (intervals.empty()) {
    std::ostringstream msg;
    msg << "(kappa, eps) = (" << kappa << ", " << eps << ") lies outside the region of possible motions";
    throw Error(ErrorCode::kOutsideRegion, msg.str());
  }
  if (branch < 0 || branch >= static_cast<int>(intervals.size())) {
    std::ostringstream msg;
    msg << "branch " << branch << " requested but the level set has " << intervals.size() << " component(s)";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const LevelInterval& iv = intervals[static_cast<std::size_t>(branch)];
  Classification c;
  c.components = static_cast<int>(intervals.size());
  c.theta_min = iv.lo;
  c.theta_max = iv.hi;

  if (iv.degenerate) {
    const bool equator = p.alpha == 0.0 && std::abs(iv.lo - 0.5 * kPi) < 1e-9;
    if (kappa == 0.0) {
      c.cls = TrajectoryClass::kPoint;
      c.target = "equilibrium";
    } else if (equator) {
      c.cls = TrajectoryClass::kUnboundedLine;
      c.target = "rolling along the equator";
    } else {
      c.cls = TrajectoryClass::kCircle;
      c.target = "permanent rotation";
    }
    return c;
  }

  // Saddle levels touching this component.
  for (const auto& cp : effective_critical_points(kappa, p)) {
    if (!cp.maximum) continue;
    if (cp.theta < iv.lo - 1e-9 || cp.theta > iv.hi + 1e-9) continue;
    const double gap = std::abs(cp.value - eps);
    if (gap <= opt.separatrix_tol) {
      c.asymptotic = true;
      if (kappa == 0.0) {
        c.cls = TrajectoryClass::kSegment;
        c.target = "unstable equilibrium";
      } else if (p.alpha == 0.0 && std::abs(cp.theta - 0.5 * kPi) < 1e-9) {
        c.cls = TrajectoryClass::kAsymptoticToLines;
        c.target = "rolling along the equator";
      } else {
        c.cls = TrajectoryClass::kAsymptoticToCircles;
        c.target = "unstable permanent rotation";
      }
      std::ostringstream where;
      where << c.target << " at theta = " << cp.theta;
      c.target = where.str();
      return c;
    }
    if (gap <= opt.near_separatrix_tol) c.near_separatrix = true;
  }

  if (kappa == 0.0) {
    c.has_N = true;
    c.cls = iv.full_circle ? TrajectoryClass::kUnboundedLine : TrajectoryClass::kSegment;
    return c;
  }

  const RotationNumber rn = rotation_number(kappa, eps, branch, p, opt.tol);
  c.has_N = true;
  c.N = rn.N;
  c.N_err = rn.N_err;
  c.tolerance = std::max(5.0 * rn.N_err + 1e-9, opt.tol_rat_floor);
  const double n = std::round(rn.N);
  if (std::abs(rn.N - n) <= c.tolerance) {
    c.cls = TrajectoryClass::kUnboundedResonant;
    c.numerator = static_cast<long>(n);
    c.denominator = 1;
    return c;
  }
  if (const auto r = rational_approximation(rn.N, c.tolerance, opt.q_max)) {
    c.cls = TrajectoryClass::kClosedPeriodic;
    c.numerator = r->first;
    c.denominator = r->second;
    return c;
  }
  c.cls = TrajectoryClass::kQuasiPeriodicBounded;
  return c;
}

std::vector<ResonancePoint> resonance_curve(int n, const Params& p, const std::vector<double>& kappas,
                                            const ResonanceOptions& opt) {
  require_valid(p);
  std::vector<std::vector<ResonancePoint>> per_kappa(kappas.size());
  const double target = -static_cast<double>(n);

  parallel_for(kappas.size(), opt.jobs, [&](std::size_t i) {
    const double kappa = kappas[i];
    if (kappa == 0.0) return;  // N vanishes identically on meridian motions
    const auto levels = critical_levels(kappa, p);
    if (levels.empty()) return;
    std::vector<std::pair<double, double>> segments;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) segments.emplace_back(levels[k], levels[k + 1]);
    segments.emplace_back(levels.back(), levels.back() + opt.eps_span);

    for (std::size_t s = 0; s < segments.size(); ++s) {
      const auto [lo, hi] = segments[s];
      const bool top = s + 1 == segments.size();
      auto residual = [&](double eps) -> std::optional<double> {
        try {
          return quick_N(kappa, eps, opt.branch, p, opt.tol) - target;
        } catch (const Error&) {
          return std::nullopt;  // branch absent on this segment
        }
      };
      double prev_e = 0.0;
      std::optional<double> prev_r;
      for (double u : slice_grid(!top)) {
        const double e = lo + (hi - lo) * u;
        const auto r = residual(e);
        if (r && prev_r && ((*r > 0.0) != (*prev_r > 0.0))) {
          double a = prev_e, b = e, fa = *prev_r;
          double root = 0.5 * (a + b);
          double froot = fa;
          for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
            root = 0.5 * (a + b);
            const auto fm = residual(root);
            if (!fm) break;
            froot = *fm;
            if (std::abs(froot) <= 1e-10) break;
            if ((froot > 0.0) == (fa > 0.0)) {
              a = root;
              fa = froot;
            } else {
              b = root;
            }
          }
          if (std::abs(froot) <= 1e-6) per_kappa[i].push_back({kappa, root, froot + target});
        }
        prev_e = e;
        prev_r = r;
      }
    }
  });

  std::vector<ResonancePoint> out;
  for (auto& v : per_kappa) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<RotationGridPoint> rotation_grid(const std::vector<double>& kappas, const std::vector<double>& energies,
                                             int branch, const Params& p, const Tolerance& tol, unsigned jobs) {
  require_valid(p);
  std::vector<RotationGridPoint> out(kappas.size() * energies.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    RotationGridPoint& g = out[i];
    g.kappa = kappas[i / energies.size()];
    g.eps = energies[i % energies.size()];
    try {
      const RotationNumber r = rotation_number(g.kappa, g.eps, branch, p, tol);
      g.N = r.N;
      g.N_err = r.N_err;
      g.inside = true;
    } catch (const Error& e) {
      // Params were validated above, so an invalid argument here is a branch
      // index the level set does not have at this point.
      if (e.code() != ErrorCode::kOutsideRegion && e.code() != ErrorCode::kInvalidArgument) throw;
      g.N = g.N_err = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return out;
}

double epsilon_min(const Params& p) {
  require_valid(p);
  const double b2 = p.beta * p.beta;
  if (b2 > 1.0 + p.alpha) {
    const auto star = inclined_equilibrium(p);
    if (star) return profile(*star, p, ThetaDomain::kExtended).U;
  }
  return 1.0 + p.alpha;
}

std::optional<double> epsilon_min_closed_form(const Params& p) {
  require_valid(p);
  const double b2 = p.beta * p.beta;
  if (!(b2 > 1.0 + p.alpha)) return std::nullopt;
  return p.beta * std::sqrt((b2 - 1.0 + p.alpha * p.alpha) / (b2 - 1.0));
}

std::optional<KappaMax> kappa_max(const Params& p, const ResonanceOptions& opt) {
  require_valid(p);
  const double b2 = p.beta * p.beta;
  if (!(p.alpha > 0.0 && b2 > 1.0 + p.alpha)) return std::nullopt;
  const auto cp = cusp(p);
  if (!cp) return std::nullopt;

  auto N_at = [&](double kappa, double eps) { return quick_N(kappa, eps, 0, p, opt.tol); };

  // Maximum of N over eps on a single-well slice (kappa above the cusp).
  struct Peak {
    double eps;
    double N;
  };
  auto peak = [&](double kappa) -> Peak {
    const auto levels = critical_levels(kappa, p);
    const double lo = levels.front();
    const double hi = lo + opt.eps_span;
    // Above the cusp the saddle has disappeared but V keeps a nearly flat
    // stretch where G0 has a local minimum; N peaks sharply near its level.
    double ghost = lo;
    {
      constexpr int kScan = 2048;
      double best_g = INFINITY;
      double prev = effective_force(kPi / kScan, kappa, p);
      for (int k = 2; k + 1 < kScan; ++k) {
        const double t = kPi * k / kScan;
        const double g = effective_force(t, kappa, p);
        const double next = effective_force(kPi * (k + 1) / kScan, kappa, p);
        if (g > 0.0 && g <= prev && g <= next && g < best_g) {
          best_g = g;
          ghost = effective_potential(t, kappa, p);
        }
        prev = g;
      }
    }
    Peak best{lo, -INFINITY};
    std::vector<double> grid;
    for (double u : slice_grid(false)) grid.push_back(lo + (hi - lo) * u);
    for (double d : {1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 2e-2, 4e-2, 8e-2}) {
      grid.push_back(ghost - d);
      grid.push_back(ghost + d);
    }
    grid.push_back(ghost);
    grid.erase(std::remove_if(grid.begin(), grid.end(), [&](double e) { return e <= lo || e >= hi; }), grid.end());
    std::sort(grid.begin(), grid.end());
    std::size_t arg = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double v = N_at(kappa, grid[k]);
      if (v > best.N) {
        best = {grid[k], v};
        arg = k;
      }
    }
    double a = arg > 0 ? grid[arg - 1] : lo + 1e-9 * (hi - lo);
    double b = arg + 1 < grid.size() ? grid[arg + 1] : hi;
    constexpr double kGolden = 0.6180339887498949;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = N_at(kappa, x1), f2 = N_at(kappa, x2);
    while (b - a > 1e-9) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGolden * (b - a);
        f2 = N_at(kappa, x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kGolden * (b - a);
        f1 = N_at(kappa, x1);
      }
    }
    const double e = 0.5 * (a + b);
    const double v = N_at(kappa, e);
    return v >= best.N ? Peak{e, v} : best;
  };

  // Walk up from the cusp until the peak of N drops below zero, then bisect.
  double k_lo = cp->kappa * (1.0 + 1e-6);
  if (peak(k_lo).N <= 0.0) return std::nullopt;
  double k_hi = k_lo;
  double step = 0.02;
  for (;;) {
    k_hi += step;
    if (k_hi > 20.0) return std::nullopt;
    if (peak(k_hi).N < 0.0) break;
    k_lo = k_hi;
    step *= 1.5;
  }
  Peak at{};
  while (k_hi - k_lo > 1e-12 * std::max(1.0, k_hi)) {
    const double mid = 0.5 * (k_lo + k_hi);
    at = peak(mid);
    if (std::abs(at.N) <= 1e-10) {
      k_lo = k_hi = mid;
      break;
    }
    (at.N > 0.0 ? k_lo : k_hi) = mid;
  }
  KappaMax out;
  out.kappa = 0.5 * (k_lo + k_hi);
  const Peak fin = peak(out.kappa);
  // The peak is sharp and lopsided, so a plain central difference is biased
  // at any usable step. Richardson-extrapolate it and Newton-polish eps on it.
  const double h = 2e-5;
  auto slope = [&](double e) {
    const double d1 = (N_at(out.kappa, e + h) - N_at(out.kappa, e - h)) / (2.0 * h);
    const double d2 = (N_at(out.kappa, e + 0.5 * h) - N_at(out.kappa, e - 0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
  };
  double e = fin.eps;
  double s = slope(e);
  for (int it = 0; it < 4 && std::abs(s) > 1e-9; ++it) {
    const double curv = (N_at(out.kappa, e + h) - 2.0 * N_at(out.kappa, e) + N_at(out.kappa, e - h)) / (h * h);
    if (!(curv < 0.0)) break;
    const double next = e - s / curv;
    const double s_next = slope(next);
    if (std::abs(s_next) >= std::abs(s)) break;
    e = next;
    s = s_next;
  }
  out.eps = e;
  out.N = N_at(out.kappa, e);
  out.dN_deps = s;
  return out;
}

}  // namespace rubberroll
