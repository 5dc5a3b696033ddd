#ifndef RUBBERROLL_RUBBERROLL_H
#define RUBBERROLL_RUBBERROLL_H

/* C interface to the rolling-ellipsoid engine.
 *
 * Every call returns an rr_status. On failure a message for the calling
 * thread is available from rr_last_error() until the next failing call.
 * Text results (CSV, JSON, reports) come back in an rr_buffer owned by the
 * caller and released with rr_buffer_destroy(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RR_BUILDING_LIBRARY)
#define RR_API __declspec(dllexport)
#else
#define RR_API __declspec(dllimport)
#endif
#else
#define RR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rr_status {
  RR_OK = 0,
  RR_ERR_INVALID_ARGUMENT = 1,
  RR_ERR_NUMERICAL = 2,
  RR_ERR_OUTSIDE_REGION = 3,
  RR_ERR_NOT_FIXED_POINT = 4,
  RR_ERR_INTERNAL = 5
} rr_status;

typedef enum rr_b_sign { RR_B_SIGN_DERIVED = 0, RR_B_SIGN_PAPER = 1 } rr_b_sign;

typedef struct rr_params {
  double alpha;
  double beta;
  double nu;
  double eta;
  int b_sign; /* rr_b_sign */
} rr_params;

typedef struct rr_tolerance {
  double abs;
  double rel;
  long max_steps;
} rr_tolerance;

typedef struct rr_body {
  double m, g, a, b1, b3, i1, i3;
} rr_body;

typedef struct rr_model rr_model;
typedef struct rr_buffer rr_buffer;

RR_API const char* rr_version(void);
RR_API const char* rr_last_error(void);
RR_API const char* rr_status_string(rr_status s);

/* Fills in the build's default B sign and alpha = 0.5, beta = 3, nu = eta = 0.5. */
RR_API void rr_params_init(rr_params* p);
RR_API void rr_tolerance_init(rr_tolerance* t);

/* scales receives (length, mass, time). */
RR_API rr_status rr_nondimensionalize(const rr_body* body, rr_params* out, double scales[3]);

RR_API rr_status rr_model_create(const rr_params* p, rr_model** out);
RR_API void rr_model_destroy(rr_model* m);
RR_API rr_status rr_model_params(const rr_model* m, rr_params* out);
RR_API rr_status rr_model_set_tolerance(rr_model* m, const rr_tolerance* t);

RR_API const char* rr_buffer_data(const rr_buffer* b);
RR_API size_t rr_buffer_size(const rr_buffer* b);
RR_API void rr_buffer_destroy(rr_buffer* b);

/* out = (F0, F1, kappa, eps) of a body-frame state. */
RR_API rr_status rr_integrals(const rr_model* m, const double omega[3], const double gamma[3], double out[4]);
RR_API rr_status rr_reduced_energy(const rr_model* m, double theta, double p_theta, double kappa, double* eps);

/* Energy of (theta, p_theta) at kappa and the index of the level-set
 * component that contains theta. */
RR_API rr_status rr_locate(const rr_model* m, double kappa, double theta, double p_theta, double* eps, int* branch);

/* p_theta >= 0 (times sign) giving energy eps at theta. */
RR_API rr_status rr_p_theta_for_energy(const rr_model* m, double kappa, double theta, double eps, int sign,
                                       double* p_theta);

RR_API rr_status rr_epsilon_min(const rr_model* m, double* eps);
RR_API rr_status rr_inclined_equilibrium(const rr_model* m, int* found, double* theta);
/* out = (theta, kappa, eps). */
RR_API rr_status rr_cusp(const rr_model* m, int* found, double out[3]);
/* out = (kappa, eps, N residual, dN/deps residual). */
RR_API rr_status rr_kappa_max(const rr_model* m, unsigned jobs, int* found, double out[4]);
RR_API rr_status rr_rotation_number(const rr_model* m, double kappa, double eps, int branch, double* N, double* N_err);

/* Trajectory CSV; max_eps_drift and max_f1_drift may be NULL. */
RR_API rr_status rr_simulate_reduced(const rr_model* m, double theta0, double p_theta0, double kappa, double t_max,
                                     double dt, rr_buffer** csv, double* max_eps_drift, double* max_f1_drift);
RR_API rr_status rr_simulate_full(const rr_model* m, const double omega[3], const double gamma[3], double t_max,
                                  double dt, rr_buffer** csv, double* max_eps_drift, double* max_f1_drift);
/* As rr_simulate_full; also reports the largest | |gamma| - 1 | removed by the
   per-step projection onto the unit sphere. */
RR_API rr_status rr_simulate_full_ex(const rr_model* m, const double omega[3], const double gamma[3], double t_max,
                                     double dt, rr_buffer** csv, double* max_eps_drift, double* max_f1_drift,
                                     double* max_renormalization);

RR_API rr_status rr_bifurcation(const rr_model* m, rr_buffer** json);
/* Problems found in a diagram document, one per line; *ok = 1 when none. */
RR_API rr_status rr_check_diagram(const char* json, int* ok, rr_buffer** problems);

/* CSV kappa,eps,N,N_err over the kappas x energies grid; points outside the
 * region of possible motions give N = nan. */
RR_API rr_status rr_rotation_grid(const rr_model* m, const double* kappas, size_t n_kappa, const double* energies,
                                  size_t n_eps, int branch, unsigned jobs, rr_buffer** csv);
RR_API rr_status rr_resonance(const rr_model* m, const int* orders, size_t n_orders, const double* kappas,
                              size_t n_kappa, int branch, unsigned jobs, rr_buffer** csv);
/* tol_rat_floor <= 0 uses the error-scaled tolerance alone. */
RR_API rr_status rr_classify(const rr_model* m, double kappa, double eps, int branch, double tol_rat_floor,
                             rr_buffer** json);
RR_API rr_status rr_kappa_max_json(const rr_model* m, unsigned jobs, rr_buffer** json);

RR_API rr_status rr_verify(const rr_model* m, int quick, uint64_t seed, int* all_passed, rr_buffer** report);

#ifdef __cplusplus
}
#endif

#endif
