#include "rubberroll/rubberroll.h"

#include <cmath>
#include <new>
#include <numbers>
#include <sstream>
#include <string>

#include "rubberroll/error.hpp"
#include "rubberroll/reconstruct.hpp"
#include "rubberroll/serialize.hpp"
#include "rubberroll/verify.hpp"

struct rr_model {
  rubberroll::Params params;
  rubberroll::Tolerance tol;
};

struct rr_buffer {
  std::string text;
};

namespace {

using namespace rubberroll;

thread_local std::string g_last_error;

rr_status fail(rr_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

template <class F>
rr_status guard(F&& f) {
  try {
    f();
    return RR_OK;
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kInvalidArgument:
        return fail(RR_ERR_INVALID_ARGUMENT, e.what());
      case ErrorCode::kNumericalFailure:
        return fail(RR_ERR_NUMERICAL, e.what());
      case ErrorCode::kOutsideRegion:
        return fail(RR_ERR_OUTSIDE_REGION, e.what());
      case ErrorCode::kNotFixedPoint:
        return fail(RR_ERR_NOT_FIXED_POINT, e.what());
    }
    return fail(RR_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RR_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

Params to_params(const rr_params& p) {
  require(p.b_sign == RR_B_SIGN_DERIVED || p.b_sign == RR_B_SIGN_PAPER, "b_sign must be 0 (derived) or 1 (paper)");
  return {p.alpha, p.beta, p.nu, p.eta, p.b_sign == RR_B_SIGN_PAPER ? BSign::kPaper : BSign::kDerived};
}

rr_params from_params(const Params& p) {
  return {p.alpha, p.beta, p.nu, p.eta, p.b_sign == BSign::kPaper ? RR_B_SIGN_PAPER : RR_B_SIGN_DERIVED};
}

rr_buffer* make_buffer(std::string text) { return new rr_buffer{std::move(text)}; }

const rr_model& model(const rr_model* m) {
  require(m != nullptr, "null model handle");
  return *m;
}

}  // namespace

extern "C" {

const char* rr_version(void) { return "1.0.0"; }

const char* rr_last_error(void) { return g_last_error.c_str(); }

const char* rr_status_string(rr_status s) {
  switch (s) {
    case RR_OK:
      return "ok";
    case RR_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case RR_ERR_NUMERICAL:
      return "numerical failure";
    case RR_ERR_OUTSIDE_REGION:
      return "outside the region of possible motions";
    case RR_ERR_NOT_FIXED_POINT:
      return "not a fixed point";
    case RR_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void rr_params_init(rr_params* p) {
  if (!p) return;
  Params d{0.5, 3.0, 0.5, 0.5};
  *p = from_params(d);
}

void rr_tolerance_init(rr_tolerance* t) {
  if (!t) return;
  const Tolerance d;
  *t = {d.abs, d.rel, d.max_steps};
}

rr_status rr_nondimensionalize(const rr_body* body, rr_params* out, double scales[3]) {
  return guard([&] {
    require(body && out, "null argument");
    const Nondimensionalized n = nondimensionalize({body->m, body->g, body->a, body->b1, body->b3, body->i1, body->i3});
    *out = from_params(n.params);
    if (scales) {
      scales[0] = n.scales.length;
      scales[1] = n.scales.mass;
      scales[2] = n.scales.time;
    }
  });
}

rr_status rr_model_create(const rr_params* p, rr_model** out) {
  return guard([&] {
    require(p && out, "null argument");
    *out = nullptr;
    const Params params = to_params(*p);
    require_valid(params);
    *out = new rr_model{params, {}};
  });
}

void rr_model_destroy(rr_model* m) { delete m; }

rr_status rr_model_params(const rr_model* m, rr_params* out) {
  return guard([&] {
    require(out != nullptr, "null argument");
    *out = from_params(model(m).params);
  });
}

rr_status rr_model_set_tolerance(rr_model* m, const rr_tolerance* t) {
  return guard([&] {
    require(m && t, "null argument");
    require(t->abs > 0.0 && t->rel > 0.0 && std::isfinite(t->abs) && std::isfinite(t->rel),
            "tolerances must be positive");
    require(t->max_steps > 0, "max_steps must be positive");
    m->tol = {t->abs, t->rel, t->max_steps};
  });
}

const char* rr_buffer_data(const rr_buffer* b) { return b ? b->text.c_str() : ""; }

size_t rr_buffer_size(const rr_buffer* b) { return b ? b->text.size() : 0; }

void rr_buffer_destroy(rr_buffer* b) { delete b; }

rr_status rr_integrals(const rr_model* m, const double omega[3], const double gamma[3], double out[4]) {
  return guard([&] {
    require(omega && gamma && out, "null argument");
    const FullState s{Vec3(omega[0], omega[1], omega[2]), Vec3(gamma[0], gamma[1], gamma[2])};
    const Integrals i = integrals(s, model(m).params);
    out[0] = i.F0;
    out[1] = i.F1;
    out[2] = i.kappa;
    out[3] = i.eps;
  });
}

rr_status rr_reduced_energy(const rr_model* m, double theta, double p_theta, double kappa, double* eps) {
  return guard([&] {
    require(eps != nullptr, "null argument");
    *eps = reduced_energy({theta, p_theta}, kappa, model(m).params);
  });
}

rr_status rr_locate(const rr_model* m, double kappa, double theta, double p_theta, double* eps, int* branch) {
  return guard([&] {
    require(eps && branch, "null argument");
    const Params& p = model(m).params;
    require(theta >= 0.0 && theta <= std::numbers::pi, "theta must lie in [0, pi]");
    *eps = reduced_energy({theta, p_theta}, kappa, p);
    const auto iv = level_set_intervals(kappa, *eps, p);
    // The state itself lies on the level set; pick the closest component to
    // absorb roundoff at turning points.
    int best = -1;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < iv.size(); ++k) {
      const double d = theta < iv[k].lo ? iv[k].lo - theta : theta > iv[k].hi ? theta - iv[k].hi : 0.0;
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    if (best < 0) throw Error(ErrorCode::kOutsideRegion, "state lies outside the region of possible motions");
    *branch = best;
  });
}

rr_status rr_p_theta_for_energy(const rr_model* m, double kappa, double theta, double eps, int sign,
                                double* p_theta) {
  return guard([&] {
    require(p_theta != nullptr, "null argument");
    const Params& p = model(m).params;
    const double v = effective_potential(theta, kappa, p);
    if (eps < v) {
      std::ostringstream msg;
      msg << "energy " << eps << " is below the effective potential " << v << " at theta = " << theta;
      throw Error(ErrorCode::kOutsideRegion, msg.str());
    }
    const double b = profile(theta, p, kappa == 0.0 ? ThetaDomain::kExtended : ThetaDomain::kInterior).B;
    *p_theta = (sign < 0 ? -1.0 : 1.0) * std::sqrt(2.0 * (eps - v) / b);
  });
}

rr_status rr_epsilon_min(const rr_model* m, double* eps) {
  return guard([&] {
    require(eps != nullptr, "null argument");
    *eps = epsilon_min(model(m).params);
  });
}

rr_status rr_inclined_equilibrium(const rr_model* m, int* found, double* theta) {
  return guard([&] {
    require(found && theta, "null argument");
    const auto t = inclined_equilibrium(model(m).params);
    *found = t.has_value();
    *theta = t.value_or(NAN);
  });
}

rr_status rr_cusp(const rr_model* m, int* found, double out[3]) {
  return guard([&] {
    require(found && out, "null argument");
    const auto c = cusp(model(m).params);
    *found = c.has_value();
    out[0] = c ? c->theta : NAN;
    out[1] = c ? c->kappa : NAN;
    out[2] = c ? c->eps : NAN;
  });
}

rr_status rr_kappa_max(const rr_model* m, unsigned jobs, int* found, double out[4]) {
  return guard([&] {
    require(found && out, "null argument");
    ResonanceOptions opt;
    opt.tol = model(m).tol;
    opt.jobs = jobs;
    const auto k = kappa_max(model(m).params, opt);
    *found = k.has_value();
    out[0] = k ? k->kappa : NAN;
    out[1] = k ? k->eps : NAN;
    out[2] = k ? k->N : NAN;
    out[3] = k ? k->dN_deps : NAN;
  });
}

rr_status rr_rotation_number(const rr_model* m, double kappa, double eps, int branch, double* N, double* N_err) {
  return guard([&] {
    require(N != nullptr, "null argument");
    const RotationNumber r = rotation_number(kappa, eps, branch, model(m).params, model(m).tol);
    *N = r.N;
    if (N_err) *N_err = r.N_err;
  });
}

rr_status rr_simulate_reduced(const rr_model* m, double theta0, double p_theta0, double kappa, double t_max,
                              double dt, rr_buffer** csv, double* max_eps_drift, double* max_f1_drift) {
  return guard([&] {
    require(csv != nullptr, "null argument");
    require(std::isfinite(t_max) && t_max > 0.0, "t_max must be positive");
    const AbsoluteTrajectory tr =
        reconstruct_trajectory({theta0, p_theta0}, kappa, t_max, model(m).params, {}, model(m).tol, dt);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    *csv = make_buffer(os.str());
    if (max_eps_drift) *max_eps_drift = tr.max_eps_drift;
    if (max_f1_drift) *max_f1_drift = tr.max_f1_drift;
  });
}

rr_status rr_simulate_full(const rr_model* m, const double omega[3], const double gamma[3], double t_max,
                           double dt, rr_buffer** csv, double* max_eps_drift, double* max_f1_drift) {
  return rr_simulate_full_ex(m, omega, gamma, t_max, dt, csv, max_eps_drift, max_f1_drift, nullptr);
}

rr_status rr_simulate_full_ex(const rr_model* m, const double omega[3], const double gamma[3], double t_max,
                              double dt, rr_buffer** csv, double* max_eps_drift, double* max_f1_drift,
                              double* max_renormalization) {
  return guard([&] {
    require(omega && gamma && csv, "null argument");
    require(std::isfinite(t_max) && t_max > 0.0, "t_max must be positive");
    const FullState s{Vec3(omega[0], omega[1], omega[2]), Vec3(gamma[0], gamma[1], gamma[2])};
    check_invariants(s);
    const AbsoluteTrajectory tr = integrate_kinematics(s, t_max, model(m).params, {}, model(m).tol, dt);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    *csv = make_buffer(os.str());
    if (max_eps_drift) *max_eps_drift = tr.max_eps_drift;
    if (max_f1_drift) *max_f1_drift = tr.max_f1_drift;
    if (max_renormalization) *max_renormalization = tr.max_renormalization;
  });
}

rr_status rr_bifurcation(const rr_model* m, rr_buffer** json) {
  return guard([&] {
    require(json != nullptr, "null argument");
    *json = make_buffer(diagram_json(diagram(model(m).params)));
  });
}

rr_status rr_check_diagram(const char* json, int* ok, rr_buffer** problems) {
  return guard([&] {
    require(json && ok, "null argument");
    const auto bad = check_diagram_json(json);
    *ok = bad.empty();
    if (problems) {
      std::string text;
      for (const auto& b : bad) text += b + "\n";
      *problems = make_buffer(std::move(text));
    }
  });
}

rr_status rr_rotation_grid(const rr_model* m, const double* kappas, size_t n_kappa, const double* energies,
                           size_t n_eps, int branch, unsigned jobs, rr_buffer** csv) {
  return guard([&] {
    require(csv && (kappas || n_kappa == 0) && (energies || n_eps == 0), "null argument");
    const auto grid = rotation_grid(std::vector<double>(kappas, kappas + n_kappa),
                                    std::vector<double>(energies, energies + n_eps), branch, model(m).params,
                                    model(m).tol, jobs);
    std::vector<RotationRow> rows;
    rows.reserve(grid.size());
    for (const auto& g : grid) rows.push_back({g.kappa, g.eps, g.N, g.N_err});
    std::ostringstream os;
    write_rotation_csv(os, rows);
    *csv = make_buffer(os.str());
  });
}

rr_status rr_resonance(const rr_model* m, const int* orders, size_t n_orders, const double* kappas, size_t n_kappa,
                       int branch, unsigned jobs, rr_buffer** csv) {
  return guard([&] {
    require(csv && (orders || n_orders == 0) && (kappas || n_kappa == 0), "null argument");
    ResonanceOptions opt;
    opt.tol = model(m).tol;
    opt.branch = branch;
    opt.jobs = jobs;
    const std::vector<double> ks(kappas, kappas + n_kappa);
    std::ostringstream os;
    for (size_t i = 0; i < n_orders; ++i)
      write_resonance_csv(os, orders[i], resonance_curve(orders[i], model(m).params, ks, opt), i == 0);
    if (n_orders == 0) os << "n,kappa,eps,N\n";
    *csv = make_buffer(os.str());
  });
}

rr_status rr_classify(const rr_model* m, double kappa, double eps, int branch, double tol_rat_floor,
                      rr_buffer** json) {
  return guard([&] {
    require(json != nullptr, "null argument");
    ClassifyOptions opt;
    opt.tol = model(m).tol;
    opt.tol_rat_floor = std::max(0.0, tol_rat_floor);
    const Classification c = classify(kappa, eps, branch, model(m).params, opt);
    *json = make_buffer(classification_json(kappa, eps, branch, model(m).params, c));
  });
}

rr_status rr_kappa_max_json(const rr_model* m, unsigned jobs, rr_buffer** json) {
  return guard([&] {
    require(json != nullptr, "null argument");
    ResonanceOptions opt;
    opt.tol = model(m).tol;
    opt.jobs = jobs;
    *json = make_buffer(kappa_max_json(model(m).params, kappa_max(model(m).params, opt)));
  });
}

rr_status rr_verify(const rr_model* m, int quick, uint64_t seed, int* all_passed, rr_buffer** report) {
  return guard([&] {
    require(all_passed != nullptr, "null argument");
    const VerifyReport r = run_verification(model(m).params, quick != 0, seed);
    *all_passed = r.all_passed();
    if (report) *report = make_buffer(format_report(r));
  });
}

}  // extern "C"
