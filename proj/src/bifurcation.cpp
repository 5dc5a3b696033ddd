#include "rubberroll/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rubberroll/error.hpp"
#include "rubberroll/reconstruct.hpp"

namespace rubberroll {

namespace {

constexpr double kPi = std::numbers::pi;

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// Numerator of omega0^2 up to sign; its roots are the inclined equilibria.
double tilt_numerator(double theta, const Params& p) {
  return std::cos(theta) * (1.0 - p.beta * p.beta) + p.alpha * profile(theta, p, ThetaDomain::kExtended).Z;
}

double lambda_sq_at(double theta, double kappa, const Params& p) {
  const ThetaDomain domain = kappa == 0.0 ? ThetaDomain::kExtended : ThetaDomain::kInterior;
  return effective_force_slope(theta, kappa, p) / profile(theta, p, domain).B;
}

Stability classify_lambda(double lambda_sq) { return lambda_sq < 0.0 ? Stability::kCenter : Stability::kSaddle; }

template <class F>
double bisect(F f, double a, double b, double width) {
  double fa = f(a);
  while (b - a > width) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double arc(const CurveSample& a, const CurveSample& b) { return std::hypot(a.kappa - b.kappa, a.eps - b.eps); }

CurveSample curve_sample(double theta, const Params& p) {
  const auto pt = sigma_theta_point(theta, p);
  CurveSample s{theta, pt->kappa, pt->eps, Stability::kCenter};
  s.stability = classify_lambda(lambda_sq_at(theta, s.kappa, p));
  return s;
}

void refine(std::vector<CurveSample>& out, const CurveSample& a, const CurveSample& b, const Params& p, double max_arc,
            int depth) {
  if (depth > 60 || arc(a, b) <= max_arc || b.theta0 - a.theta0 < 1e-15) {
    out.push_back(b);
    return;
  }
  const CurveSample m = curve_sample(0.5 * (a.theta0 + b.theta0), p);
  refine(out, a, m, p, max_arc, depth + 1);
  refine(out, m, b, p, max_arc, depth + 1);
}

bool in_window(const CurveSample& s, const CurveOptions& opt) {
  return std::abs(s.kappa) <= opt.kappa_window && s.eps <= opt.eps_window;
}

// Splits a sampled branch into pieces of constant stability and cuts it at
// the window. `pinned` samples (cusp) close the piece on both sides.
void emit_pieces(std::vector<Curve>& curves, const std::vector<CurveSample>& samples, const std::vector<double>& pinned,
                 const CurveOptions& opt, bool equator) {
  auto label_of = [&](const Curve& c) {
    if (equator) return std::string("sigma_pi2");
    if (c.samples.empty()) return std::string();
    const auto& mid = c.samples[c.samples.size() / 2];
    const bool center = std::count_if(c.samples.begin(), c.samples.end(), [](const CurveSample& s) {
                          return s.stability == Stability::kCenter;
                        }) * 2 > static_cast<long>(c.samples.size());
    if (!center) return std::string("sigma_u");
    return std::string(mid.theta0 < 0.5 * kPi ? "sigma_s0" : "sigma_spi");
  };
  auto flush = [&](Curve& c) {
    if (c.samples.size() >= 2) {
      c.label = label_of(c);
      curves.push_back(c);
    }
    c.samples.clear();
  };
  auto is_pinned = [&](const CurveSample& s) {
    return std::any_of(pinned.begin(), pinned.end(), [&](double t) { return t == (equator ? s.kappa : s.theta0); });
  };

  Curve cur;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const CurveSample& s = samples[i];
    if (!in_window(s, opt)) {
      flush(cur);
      continue;
    }
    if (is_pinned(s)) {
      // A pinned sample closes the current piece and opens the next one,
      // taking the stability of its neighbour on each side.
      CurveSample end = s;
      if (i > 0) end.stability = samples[i - 1].stability;
      cur.samples.push_back(end);
      CurveSample start = s;
      if (i + 1 < samples.size()) start.stability = samples[i + 1].stability;
      flush(cur);
      cur.samples.push_back(start);
      continue;
    }
    if (!cur.samples.empty() && cur.samples.back().stability != s.stability) flush(cur);
    cur.samples.push_back(s);
  }
  flush(cur);
}

void mirror(std::vector<Curve>& curves) {
  const std::size_t n = curves.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool nonzero = std::any_of(curves[i].samples.begin(), curves[i].samples.end(),
                                     [](const CurveSample& s) { return s.kappa != 0.0; });
    if (!nonzero) continue;
    Curve m = curves[i];
    m.kappa_sign = -1;
    for (auto& s : m.samples) s.kappa = -s.kappa;
    curves.push_back(std::move(m));
  }
}

}  // namespace

const char* to_string(Stability s) { return s == Stability::kCenter ? "center" : "saddle"; }

const char* to_string(DiagramType t) {
  switch (t) {
    case DiagramType::kA:
      return "a";
    case DiagramType::kB:
      return "b";
    case DiagramType::kC:
      return "c";
    case DiagramType::kD:
      return "d";
    case DiagramType::kE:
      return "e";
  }
  return "?";
}

LinearStability linear_stability(double theta0, double kappa, const Params& p) {
  require_valid(p);
  const bool vertex = theta0 == 0.0 || theta0 == kPi;
  if (vertex && kappa != 0.0) throw Error(ErrorCode::kNotFixedPoint, "a vertex is a fixed point only for kappa = 0");
  if (!vertex) {
    if (!(theta0 > 0.0 && theta0 < kPi))
      throw Error(ErrorCode::kInvalidArgument, "linear_stability: theta0 outside [0, pi]");
    const double sn = std::sin(theta0);
    const double g0 = effective_force(theta0, kappa, p);
    const double scale = 1.0 + kappa * kappa / (sn * sn * sn) + std::abs(profile(theta0, p).dU);
    if (std::abs(g0) > 1e-8 * scale) {
      std::ostringstream msg;
      msg << "(theta0, kappa) = (" << theta0 << ", " << kappa << ") is not a fixed point, G0 = " << g0;
      throw Error(ErrorCode::kNotFixedPoint, msg.str());
    }
  }
  LinearStability out;
  out.lambda_sq = lambda_sq_at(theta0, kappa, p);
  out.type = classify_lambda(out.lambda_sq);
  return out;
}

double omega0_sq(double theta, const Params& p) {
  require_valid(p);
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  if (!(theta > 0.0 && theta < kPi) || std::abs(c) < 1e-15)
    throw Error(ErrorCode::kInvalidArgument, "omega0_sq: theta must avoid the poles and the equator");
  const SurfaceEval e = profile(theta, p);
  const double denom = c * e.Z * (p.eta * e.U * e.U + c * c + p.nu * s * s);
  return -p.eta * s * s * tilt_numerator(theta, p) / denom;
}

std::optional<CurvePoint> sigma_theta_point(double theta0, const Params& p) {
  if (!(theta0 >= 0.0 && theta0 <= kPi)) return std::nullopt;
  const double s = std::sin(theta0);
  const double c = std::cos(theta0);
  const double z = profile(theta0, p, ThetaDomain::kExtended).Z;
  double f = (p.beta * p.beta - 1.0) / z;
  double eps = (3.0 * z * z - 1.0) / (2.0 * z);
  if (std::abs(c) < 1e-15) {
    if (p.alpha != 0.0) return std::nullopt;
  } else {
    f -= p.alpha / c;
    eps += p.alpha * (3.0 * c * c - 1.0) / (2.0 * c);
  }
  if (f < 0.0) return std::nullopt;
  const bool vertex = theta0 == 0.0 || theta0 == kPi;
  return CurvePoint{theta0, vertex ? 0.0 : s * s * std::sqrt(f), eps};
}

PermanentRotation permanent_rotation(double theta0, const Params& p) {
  const double w2 = omega0_sq(theta0, p);
  if (w2 < 0.0) {
    std::ostringstream msg;
    msg << "no permanent rotation at theta0 = " << theta0 << " (omega0^2 = " << w2 << ")";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const SurfaceEval e = profile(theta0, p);
  const double s = std::sin(theta0);
  const double c = std::cos(theta0);
  PermanentRotation r;
  r.theta0 = theta0;
  r.omega0 = std::sqrt(w2);
  r.kappa = e.J * r.omega0 * s;
  r.eps = r.kappa * r.kappa / (2.0 * s * s) + e.U;
  r.rho_c = e.Z * s / c + p.alpha * s;
  r.rho_p = p.beta * p.beta / e.Z * s / c;
  r.z_c = e.U;
  r.lambda_sq = lambda_sq_at(theta0, r.kappa, p);
  r.stability = classify_lambda(r.lambda_sq);
  // omega = omega0 along the unit vector of gamma x (e3 x gamma), phi = 0.
  r.state.gamma = {0.0, s, c};
  r.state.omega = r.omega0 * Vec3(0.0, -c, s);
  return r;
}

std::optional<double> inclined_equilibrium(const Params& p) {
  require_valid(p);
  if (p.alpha == 0.0 && p.beta == 1.0) return std::nullopt;
  const double n0 = tilt_numerator(0.0, p);
  const double npi = tilt_numerator(kPi, p);
  if (n0 == 0.0) return 0.0;
  if (npi == 0.0) return kPi;
  if ((n0 > 0.0) == (npi > 0.0)) return std::nullopt;
  return bisect([&](double t) { return tilt_numerator(t, p); }, 0.0, kPi, 1e-14);
}

std::optional<double> inclined_equilibrium_closed_form(const Params& p) {
  require_valid(p);
  const double b2 = p.beta * p.beta;
  if (p.alpha == 0.0) return b2 == 1.0 ? std::nullopt : std::optional<double>(0.5 * kPi);
  const double denom = (1.0 - b2) * (1.0 - b2 - p.alpha * p.alpha);
  if (denom <= 0.0) return std::nullopt;
  const double c2 = p.alpha * p.alpha * b2 / denom;
  if (c2 > 1.0) return std::nullopt;
  const double c = std::copysign(std::sqrt(c2), b2 - 1.0);
  return std::acos(c);
}

AlternativeClosedForms alternative_closed_forms(const Params& p) {
  require_valid(p);
  const double b2 = p.beta * p.beta;
  const double a2 = p.alpha * p.alpha;
  AlternativeClosedForms out;
  const double prod = (1.0 - b2) * (1.0 + a2 - b2);
  if (prod > 0.0) {
    const double c = p.alpha * p.beta / std::sqrt(prod);
    if (std::abs(c) <= 1.0) out.theta_star = std::acos(c);
  }
  if (b2 != 1.0) {
    const double ratio = (1.0 + a2 - b2) / (1.0 - b2);
    if (ratio >= 0.0) out.eps_min = std::sqrt(ratio) * p.beta;
  }
  return out;
}

std::optional<Cusp> cusp(const Params& p) {
  require_valid(p);
  const double b2 = p.beta * p.beta;
  if (!(p.alpha > 0.0 && b2 > 1.0 + p.alpha)) return std::nullopt;
  const auto star = inclined_equilibrium(p);
  if (!star) return std::nullopt;
  // G0 = 0 gives kappa^2 = U' sin^3 / cos; substituting into G0' = 0 leaves
  // a function of theta alone.
  auto h = [&](double t) {
    const SurfaceEval e = profile(t, p);
    const double s = std::sin(t);
    const double c = std::cos(t);
    return -e.dU * (1.0 + 2.0 * c * c) / (s * c) - e.d2U;
  };
  constexpr int kGrid = 512;
  double prev_t = *star * 1e-6;
  double prev_h = h(prev_t);
  for (int i = 1; i <= kGrid; ++i) {
    const double t = *star * (i == kGrid ? 1.0 - 1e-12 : static_cast<double>(i) / kGrid);
    const double ht = h(t);
    if ((ht > 0.0) != (prev_h > 0.0)) {
      const double tc = bisect(h, prev_t, t, 1e-15);
      const auto pt = sigma_theta_point(tc, p);
      if (!pt) return std::nullopt;
      return Cusp{tc, pt->kappa, pt->eps};
    }
    prev_t = t;
    prev_h = ht;
  }
  return std::nullopt;
}

std::vector<Curve> sigma_theta_curve(const Params& p, const CurveOptions& opt) {
  require_valid(p);
  std::vector<Curve> curves;
  const double b2 = p.beta * p.beta;
  if (p.alpha == 0.0 && b2 <= 1.0) return curves;  // no rotations off the equator (sphere: every state degenerate)

  const auto star = inclined_equilibrium(p);
  const auto cp = cusp(p);
  std::vector<std::pair<double, double>> ranges;
  if (p.alpha == 0.0) {
    ranges.emplace_back(0.0, kPi);
  } else {
    if (b2 >= 1.0 + p.alpha && star) ranges.emplace_back(0.0, *star);
    // Right half: kappa grows without bound towards the equator, so start at
    // the first inclination inside the window.
    const double right_end = b2 >= 1.0 - p.alpha ? kPi : (star ? *star : kPi);
    if (b2 >= 1.0 - p.alpha || star) {
      auto outside = [&](double t) {
        const auto pt = sigma_theta_point(t, p);
        if (!pt) return 1.0;
        return std::max(pt->kappa / opt.kappa_window, pt->eps / opt.eps_window) - 1.0;
      };
      double lo = 0.5 * kPi + 1e-15;
      if (outside(right_end) <= 0.0) {
        lo = outside(lo) > 0.0 ? bisect(outside, lo, right_end, 1e-15) : lo;
        ranges.emplace_back(lo, right_end);
      }
    }
  }

  std::vector<double> pinned;
  if (cp) pinned.push_back(cp->theta);
  for (const auto& [a, b] : ranges) {
    constexpr int kSeed = 64;
    std::vector<double> grid;
    for (int i = 0; i <= kSeed; ++i) grid.push_back(a + (b - a) * i / kSeed);
    for (double t : pinned)
      if (t > a && t < b) grid.push_back(t);
    if (p.alpha == 0.0) grid.push_back(0.5 * kPi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<CurveSample> samples;
    std::vector<CurveSample> seeds;
    for (double t : grid) {
      if (sigma_theta_point(t, p)) seeds.push_back(curve_sample(t, p));
    }
    if (seeds.empty()) continue;
    samples.push_back(seeds.front());
    for (std::size_t i = 1; i < seeds.size(); ++i) refine(samples, seeds[i - 1], seeds[i], p, opt.max_arc, 0);
    std::vector<double> pins = pinned;
    if (p.alpha == 0.0) pins.push_back(0.5 * kPi);
    emit_pieces(curves, samples, pins, opt, false);
  }
  if (opt.mirror) mirror(curves);
  return curves;
}

Curve equator_parabola(const Params& p, const CurveOptions& opt) {
  require_valid(p);
  if (p.alpha != 0.0) throw Error(ErrorCode::kInvalidArgument, "rolling on the equator requires alpha = 0");
  std::vector<CurveSample> samples;
  const double b2 = p.beta * p.beta;
  const double kappa_c = b2 > 1.0 ? std::sqrt((b2 - 1.0) / p.beta) : -1.0;
  const double kmax = std::min(opt.kappa_window, std::sqrt(std::max(0.0, 2.0 * (opt.eps_window - p.beta))));
  auto sample = [&](double k) {
    return CurveSample{0.5 * kPi, k, 0.5 * k * k + p.beta, classify_lambda(lambda_sq_at(0.5 * kPi, k, p))};
  };
  for (double k = 0.0; k < kmax;) {
    samples.push_back(sample(k));
    const double next = k + opt.max_arc / std::sqrt(1.0 + k * k);
    if (kappa_c > k && kappa_c < next) samples.push_back(sample(kappa_c));
    k = next;
  }
  samples.push_back(sample(kmax));
  std::vector<Curve> pieces;
  CurveOptions o = opt;
  o.mirror = false;
  emit_pieces(pieces, samples, kappa_c > 0.0 ? std::vector<double>{kappa_c} : std::vector<double>{}, o, true);
  // A single labeled curve; stability is carried per sample.
  Curve out;
  out.label = "sigma_pi2";
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto& s = pieces[i].samples;
    out.samples.insert(out.samples.end(), s.begin() + (i > 0 ? 1 : 0), s.end());
  }
  return out;
}

DiagramType diagram_type(const Params& p, bool* boundary) {
  require_valid(p);
  const double b2 = p.beta * p.beta;
  bool edge = false;
  DiagramType t;
  if (p.alpha == 0.0) {
    edge = near(b2, 1.0);
    t = (b2 < 1.0 && !edge) ? DiagramType::kD : DiagramType::kE;
  } else {
    const bool lower = near(b2, 1.0 - p.alpha);
    const bool upper = near(b2, 1.0 + p.alpha);
    edge = lower || upper;
    if (upper || b2 > 1.0 + p.alpha)
      t = DiagramType::kC;
    else if (lower || b2 > 1.0 - p.alpha)
      t = DiagramType::kB;
    else
      t = DiagramType::kA;
  }
  if (boundary != nullptr) *boundary = edge;
  return t;
}

BifurcationDiagram diagram(const Params& p, const CurveOptions& opt) {
  require_valid(p);
  BifurcationDiagram d;
  d.params = p;
  d.type = diagram_type(p, &d.boundary);
  d.curves = sigma_theta_curve(p, opt);
  if (p.alpha == 0.0) {
    Curve eq = equator_parabola(p, opt);
    d.curves.push_back(eq);
    if (opt.mirror) {
      for (auto& s : eq.samples) s.kappa = -s.kappa;
      eq.kappa_sign = -1;
      d.curves.push_back(eq);
    }
  }
  d.cusp = cusp(p);
  d.theta_star = inclined_equilibrium(p);
  d.eps_min = epsilon_min(p);

  const double b2 = p.beta * p.beta;
  auto vertex = [&](const char* label, double theta, bool has_branch) {
    const double u = profile(theta, p, ThetaDomain::kExtended).U;
    d.points.push_back({label, theta, 0.0, u, !has_branch, lambda_sq_at(theta, 0.0, p) < 0.0});
  };
  const bool sphere = p.alpha == 0.0 && b2 == 1.0;
  vertex("sigma_0", 0.0, !sphere && b2 >= 1.0 + p.alpha);
  vertex("sigma_pi", kPi, !sphere && b2 >= 1.0 - p.alpha);
  if (d.theta_star && *d.theta_star > 0.0 && *d.theta_star < kPi) {
    const double t = *d.theta_star;
    d.points.push_back({p.alpha == 0.0 ? "sigma_pi2" : "sigma_star", t, 0.0,
                        profile(t, p).U, false, lambda_sq_at(t, 0.0, p) < 0.0});
  }
  double floor = profile(kPi, p, ThetaDomain::kExtended).U;
  for (const auto& c : effective_critical_points(0.0, p)) floor = std::min(floor, c.value);
  std::ostringstream rpm;
  rpm << "eps >= min over theta of kappa^2/(2 sin^2 theta) + U(theta); lowest point (0, " << floor << ")";
  d.rpm_boundary = rpm.str();
  return d;
}

Components connected_components(double kappa, double eps, const Params& p) {
  require_valid(p);
  Components c;
  c.intervals = level_set_intervals(kappa, eps, p);
  c.count = static_cast<int>(c.intervals.size());
  return c;
}

std::vector<ReducedFixedPoint> reduced_fixed_points(double kappa, const Params& p) {
  require_valid(p);
  std::vector<ReducedFixedPoint> out;
  for (const auto& c : effective_critical_points(kappa, p)) {
    const double l = lambda_sq_at(c.theta, kappa, p);
    out.push_back({c.theta, c.value, {l, classify_lambda(l)}});
  }
  return out;
}

}  // namespace rubberroll
