#include "rubberroll/integrate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dop853.hpp"
#include "rubberroll/error.hpp"

namespace rubberroll {

namespace {

constexpr double kPi = std::numbers::pi;
using FullVector = Eigen::Matrix<double, 6, 1>;

FullVector pack(const FullState& s) {
  FullVector v;
  v << s.omega, s.gamma;
  return v;
}

FullState unpack(const FullVector& v) { return {v.head<3>(), v.tail<3>()}; }

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Locates g(t) = 0 inside the last accepted step, g taken from the dense
// output. Bisection down to roundoff, then one Newton polish with the exact
// right-hand side at the interpolated point.
template <class Stepper, class G, class DG>
double locate(Stepper& st, G g, DG dg) {
  double a = st.t_previous();
  double b = st.t();
  double ga = g(st.y_previous());
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double gm = g(st.dense(m));
    if (gm == 0.0) return m;
    if (sign_of(gm) == sign_of(ga)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  double t = 0.5 * (a + b);
  const auto y = st.dense(t);
  const double slope = dg(st.eval_rhs(t, y));
  if (slope != 0.0) {
    const double next = t - g(y) / slope;
    if (std::abs(next - t) <= std::abs(b - a) + 1e-15) t = next;
  }
  return t;
}

}  // namespace

FullTrajectory integrate_full(const FullState& init, double t_end, const Params& p, const Tolerance& tol,
                              double dt_out) {
  require_valid(p);
  check_invariants(init);
  detail::Dop853<6> st([&p](double, const FullVector& y) {
    const FullRates r = full_rhs(unpack(y), p);
    FullVector d;
    d << r.omega_dot, r.gamma_dot;
    return d;
  }, tol);

  FullTrajectory out;
  const Integrals i0 = integrals(init, p);
  const double dir = t_end >= 0.0 ? 1.0 : -1.0;
  st.start(0.0, pack(init), dir, std::max(std::abs(t_end), 1e-12));
  out.samples.push_back({0.0, init});

  auto track = [&](const FullState& s) {
    const Integrals now = integrals(s, p);
    out.drift.F1 = std::max(out.drift.F1, std::abs(now.F1 - i0.F1));
    out.drift.kappa_rel = std::max(out.drift.kappa_rel, std::abs(now.kappa - i0.kappa) / std::max(1.0, std::abs(i0.kappa)));
    out.drift.eps_rel = std::max(out.drift.eps_rel, std::abs(now.eps - i0.eps) / std::max(1.0, std::abs(i0.eps)));
  };

  long next_out = 1;
  bool done = t_end == 0.0;
  while (!done) {
    done = st.step(t_end);
    if (dt_out > 0.0) {
      for (;;) {
        const double to = dir * dt_out * static_cast<double>(next_out);
        if ((to - st.t()) * dir > 0.0) break;
        FullState s = unpack(st.dense(to));
        s.gamma.normalize();
        out.samples.push_back({to, s});
        ++next_out;
      }
    }
    FullVector y = st.y();
    const double n2 = y.tail<3>().squaredNorm();
    out.drift.F0 = std::max(out.drift.F0, std::abs(n2 - 1.0));
    const double n = std::sqrt(n2);
    out.drift.max_renormalization = std::max(out.drift.max_renormalization, std::abs(n - 1.0));
    y.tail<3>() /= n;
    st.replace_state(y);
    const FullState s = unpack(y);
    track(s);
    if (dt_out <= 0.0) out.samples.push_back({st.t(), s});
  }
  if (dt_out > 0.0 && out.samples.back().t != st.t()) out.samples.push_back({st.t(), unpack(st.y())});
  out.drift.steps = st.accepted();
  out.drift.rejected = st.rejected();
  return out;
}

ReducedVector reduced_augmented_rhs(const ReducedVector& y, double kappa, const Params& p) {
  const double theta = y[0];
  const double pt = y[1];
  const ReducedRates r = reduced_rhs({theta, pt}, kappa, p);
  const SurfaceEval e = profile(theta, p, kappa == 0.0 ? ThetaDomain::kExtended : ThetaDomain::kInterior);
  ReducedVector d;
  d[0] = r.theta_dot;
  d[1] = r.p_theta_dot;
  std::complex<double> spin{0.0, pt};
  if (kappa == 0.0) {
    d[2] = d[3] = 0.0;
  } else {
    const double sn = std::sin(theta);
    const double w3 = kappa / e.J;
    d[2] = -w3 * std::cos(theta) / (sn * sn);
    d[3] = w3 / (sn * sn);
    spin.real(w3 / sn);
  }
  const std::complex<double> zeta_dot = -e.U * spin * std::polar(1.0, y[2]);
  d[4] = zeta_dot.real();
  d[5] = zeta_dot.imag();
  return d;
}

ReducedTrajectory integrate_reduced(const ReducedVector& init, double kappa, double t_end, const Params& p,
                                    const ReducedOptions& options) {
  require_valid(p);
  detail::Dop853<6> st([&](double, const ReducedVector& y) { return reduced_augmented_rhs(y, kappa, p); },
                       options.tol);
  ReducedTrajectory out;
  const double dir = t_end >= 0.0 ? 1.0 : -1.0;
  auto energy = [&](const ReducedVector& y) { return reduced_energy({y[0], y[1]}, kappa, p); };
  out.eps0 = energy(init);
  st.start(0.0, init, dir, std::max(std::abs(t_end), 1e-12));
  if (options.record) {
    out.t.push_back(0.0);
    out.y.push_back(init);
  }

  long next_out = 1;
  bool done = t_end == 0.0;
  while (!done) {
    done = st.step(t_end);
    const ReducedVector& y0 = st.y_previous();
    const ReducedVector& y1 = st.y();
    double t_stop = st.t();
    ReducedVector y_stop = y1;

    if (kappa == 0.0) {
      const double k0 = std::floor(y0[0] / kPi);
      const double k1 = std::floor(y1[0] / kPi);
      if (k0 != k1) {
        const double pole = std::max(k0, k1) * kPi;
        const double tp = locate(st, [pole](const ReducedVector& y) { return y[0] - pole; },
                                 [](const ReducedVector& d) { return d[0]; });
          out.poles.push_back({tp, pole});
        if (options.stop_after_poles > 0 && static_cast<int>(out.poles.size()) >= options.stop_after_poles) {
          t_stop = tp;
          y_stop = st.dense(tp);
          y_stop[0] = pole;
          done = true;
        }
      }
    }

    if (!done && y0[1] != 0.0 && (sign_of(y1[1]) != sign_of(y0[1]))) {
      const double ts = locate(st, [](const ReducedVector& y) { return y[1]; },
                               [](const ReducedVector& d) { return d[1]; });
      ReducedVector ys = st.dense(ts);
      ys[1] = 0.0;
      out.sections.push_back({ts, ys, sign_of(reduced_augmented_rhs(ys, kappa, p)[1])});
      if (options.stop_after_sections > 0 &&
          static_cast<int>(out.sections.size()) >= options.stop_after_sections) {
        t_stop = ts;
        y_stop = ys;
        done = true;
      }
    }

    if (options.record && options.dt_out > 0.0) {
      for (;;) {
        const double to = dir * options.dt_out * static_cast<double>(next_out);
        if ((to - t_stop) * dir > 0.0) break;
        out.t.push_back(to);
        out.y.push_back(st.dense(to));
        ++next_out;
      }
    }
    out.max_eps_drift =
        std::max(out.max_eps_drift, std::abs(energy(y_stop) - out.eps0) / std::max(1.0, std::abs(out.eps0)));
    if (!options.record && done) {
      out.t.assign(1, t_stop);
      out.y.assign(1, y_stop);
    } else if (options.record && (options.dt_out <= 0.0 || (done && out.t.back() != t_stop))) {
      out.t.push_back(t_stop);
      out.y.push_back(y_stop);
    }
  }
  out.steps = st.accepted();
  out.rejected = st.rejected();
  return out;
}

ReducedVector pole_glue(const ReducedVector& y, double kappa) {
  if (kappa != 0.0) throw Error(ErrorCode::kInvalidArgument, "pole gluing applies only at kappa = 0");
  const double k = std::round(y[0] / kPi);
  if (std::abs(y[0] - k * kPi) > 1e-8) {
    std::ostringstream msg;
    msg << "pole gluing needs theta at a pole, got theta = " << y[0];
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  ReducedVector g = y;
  g[0] = 2.0 * k * kPi - y[0];
  g[1] = -y[1];
  g[2] = y[2] + kPi;
  g[3] = y[3] + kPi;
  return g;
}

ReducedVector fold_meridian(const ReducedVector& y) {
  ReducedVector g = y;
  // A full turn of the meridian chart is the identity on the body.
  g[0] -= 2.0 * kPi * std::round(g[0] / (2.0 * kPi));
  if (g[0] < 0.0) {
    g[0] = -g[0];
    g[1] = -g[1];
    g[2] += kPi;
    g[3] += kPi;
  }
  return g;
}

SectionPeriod section_period(double kappa, double eps, int branch, const Params& p, const Tolerance& tol) {
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
  SectionPeriod out;
  out.theta_min = iv.lo;
  out.theta_max = iv.hi;
  if (iv.degenerate) {
    out.fixed_point = true;
    return out;
  }

  ReducedVector y0 = ReducedVector::Zero();
  ReducedOptions opt;
  opt.tol = tol;
  opt.record = false;
  if (iv.full_circle) {
    // Half a turn of the unfolded meridian, vertex to vertex; the other half
    // is its mirror image.
    out.full_circle = true;
    const SurfaceEval e = profile(0.0, p, ThetaDomain::kExtended);
    y0[1] = std::sqrt(2.0 * (eps - e.U) / e.B);
    opt.stop_after_poles = 1;
  } else {
    out.through_pole = iv.touches_zero || iv.touches_pi;
    y0[0] = iv.touches_zero ? iv.hi : iv.lo;
    opt.stop_after_sections = 1;
  }
  const auto tr = integrate_reduced(y0, kappa, 1e7, p, opt);
  if (tr.t.empty() || (tr.sections.empty() && tr.poles.empty()))
    throw Error(ErrorCode::kNumericalFailure, "no return to the section p_theta = 0");
  const double t_half = tr.t.back();
  const ReducedVector& y_half = tr.y.back();
  out.eps_drift = tr.max_eps_drift;

  out.T = 2.0 * t_half;
  out.psi_advance = 2.0 * y_half[2];
  out.phi_advance = 2.0 * y_half[3];
  // The second half retraces theta(t) backwards with p_theta reversed; its
  // center-of-mass increment is the mirror image of the first one rotated by
  // twice the precession of the first half.
  const std::complex<double> dz(y_half[4], y_half[5]);
  out.drift = out.full_circle ? 2.0 * dz : dz + std::polar(1.0, 2.0 * y_half[2]) * std::conj(dz);
  return out;
}

}  // namespace rubberroll
