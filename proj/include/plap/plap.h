#ifndef PLAP_PLAP_H
#define PLAP_PLAP_H

/*
 * C interface to the radial p-Laplacian toolkit.
 *
 * Every function returns a plap_status; on failure a message is available
 * from plap_last_error() until the next call on the same thread. Handles
 * are opaque and owned by the caller (release with the matching _destroy).
 * Strings returned through char** are released with plap_string_free.
 */

#include <stddef.h>

#if defined(_WIN32)
#if defined(PLAP_BUILDING)
#define PLAP_API __declspec(dllexport)
#else
#define PLAP_API __declspec(dllimport)
#endif
#else
#define PLAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum plap_status {
  PLAP_OK = 0,
  PLAP_ERR_INVALID_ARGUMENT = 1,
  PLAP_ERR_OUT_OF_RANGE = 2,
  PLAP_ERR_NUMERICAL = 3,
  PLAP_ERR_NOT_FOUND = 4,
  PLAP_ERR_IO = 5,
  PLAP_ERR_INTERNAL = 6
} plap_status;

typedef enum plap_branch { PLAP_BRANCH_INFINITY = 0, PLAP_BRANCH_ZERO = 1 } plap_branch;

typedef enum plap_certificate_kind {
  PLAP_CERT_PHI_BOUND = 0,
  PLAP_CERT_ENERGY_UNBOUNDED = 1,
  PLAP_CERT_ENERGY_NEGATIVE_SMALL = 2
} plap_certificate_kind;

typedef enum plap_map_case { PLAP_MAP_SUBCRITICAL = 0, PLAP_MAP_CRITICAL = 1 } plap_map_case;

typedef struct plap_problem plap_problem;
typedef struct plap_nonlinearity plap_nonlinearity;
typedef struct plap_solution_set plap_solution_set;

typedef double (*plap_scalar_fn)(double x, void* user);

PLAP_API const char* plap_last_error(void);
PLAP_API const char* plap_version(void);
PLAP_API void plap_string_free(char* s);

/* Problem: annulus a < |x| < b in R^N, 1 < p <= N, and the weight q(t). */

PLAP_API plap_status plap_problem_create(int dimension, double p, double inner, double outer,
                                         plap_problem** out);
PLAP_API void plap_problem_destroy(plap_problem* problem);

/* Right-hand side g(|x|) f(u): q(t) becomes g(r(t)) times the geometric
 * weight. g must stay positive on [a, b] and outlive the problem. */
PLAP_API plap_status plap_problem_set_radial_weight(plap_problem* problem, plap_scalar_fn g, void* user);
/* Replaces q by the constant c (testing only; pullbacks keep the map). */
PLAP_API plap_status plap_problem_set_constant_weight(plap_problem* problem, double c);

PLAP_API plap_status plap_problem_map_case(const plap_problem* problem, plap_map_case* out);
PLAP_API plap_status plap_problem_p(const plap_problem* problem, double* p);
PLAP_API plap_status plap_problem_r_to_t(const plap_problem* problem, double r, double* t);
PLAP_API plap_status plap_problem_t_to_r(const plap_problem* problem, double t, double* r);
PLAP_API plap_status plap_problem_weight(const plap_problem* problem, double t, double* q);
PLAP_API plap_status plap_problem_weight_bounds(const plap_problem* problem, double* q0, double* q1);

/* Nonlinearities. f vanishes for negative arguments. */

PLAP_API plap_status plap_nonlinearity_zero(plap_nonlinearity** out);
PLAP_API plap_status plap_nonlinearity_power(double coefficient, double exponent, plap_nonlinearity** out);
/* Pieces i = 0..count-1 on [lo[i], hi[i]] with coefficients
 * coeffs[offsets[i] .. offsets[i+1]) in powers of (x - lo[i]). */
PLAP_API plap_status plap_nonlinearity_piecewise(size_t count, const double* lo, const double* hi,
                                                 const size_t* offsets, const double* coeffs,
                                                 plap_nonlinearity** out);
/* Arbitrary f; F by adaptive quadrature. f and user must outlive the handle. */
PLAP_API plap_status plap_nonlinearity_callback(const char* name, plap_scalar_fn f, void* user,
                                                plap_nonlinearity** out);
PLAP_API plap_status plap_nonlinearity_oscillating(double p, double q0, double growth, int k_max,
                                                   plap_branch branch, plap_nonlinearity** out);
PLAP_API plap_status plap_nonlinearity_set_sequences(plap_nonlinearity* nl, size_t count, const double* a,
                                                     const double* b);
PLAP_API void plap_nonlinearity_destroy(plap_nonlinearity* nl);

/* Plateau layout of the oscillating family: fills a[0..k_max), b[0..k_max). */
PLAP_API plap_status plap_oscillating_layout(int k_max, plap_branch branch, double* a, double* b);

PLAP_API plap_status plap_nonlinearity_eval(const plap_nonlinearity* nl, double x, double* f, double* F);
/* Number of sequence terms (0 when none are attached). */
PLAP_API plap_status plap_nonlinearity_sequence_count(const plap_nonlinearity* nl, size_t* count);

/* Constants. */

PLAP_API plap_status plap_sigma(double p, double q0, double* sigma, double* mu_bar, double* grid_sigma,
                                double* grid_argmin);
PLAP_API plap_status plap_embedding_constant(double p, double* c);
PLAP_API plap_status plap_growth_threshold(double p, double q0, double* threshold);

/* Ratio, plateau and growth hypotheses on k = 1..count; report written as JSON. */

typedef struct plap_hypothesis_options {
  int has_window;
  double window_lo;
  double window_hi;
  int threads;
} plap_hypothesis_options;

PLAP_API void plap_hypothesis_options_init(plap_hypothesis_options* options);
PLAP_API plap_status plap_check_hypotheses(const plap_nonlinearity* nl, double p, double q0, int count,
                                           plap_branch branch, const plap_hypothesis_options* options,
                                           char** json, int* all_hold);

/* Certificates. */

typedef struct plap_certificate_options {
  int count;
  plap_branch branch;
  double t0;
  int has_gamma;
  double gamma;
  int has_h;
  double h;
  size_t elements;
  int threads;
} plap_certificate_options;

PLAP_API void plap_certificate_options_init(plap_certificate_options* options);
PLAP_API plap_status plap_certify(const plap_problem* problem, const plap_nonlinearity* nl,
                                  plap_certificate_kind kind, const plap_certificate_options* options,
                                  char** json, int* verdict);

/* Solutions: shooting over a slope range, optional descent polish, then
 * de-duplication by sup distance. */

typedef struct plap_solve_options {
  double slope_lo;
  double slope_hi;
  int samples;
  int log_spacing;
  int refine;
  int refine_factor;
  size_t elements;
  int substeps;
  double terminal_tolerance;
  double residual_tolerance;
  double nonneg_tolerance;
  double divergence_bound; /* <= 0: automatic */
  int max_bisections;
  int threads;
  int polish;
  double descent_tolerance;
  int descent_max_iterations;
  double dedupe_tolerance;
} plap_solve_options;

typedef struct plap_solution_info {
  double slope;
  double p_norm;
  double phi;
  double psi;
  double energy;
  double weak_residual;
  double sup;
  double min_value;
  int polished;
  size_t nodes;
} plap_solution_info;

PLAP_API void plap_solve_options_init(plap_solve_options* options);
PLAP_API plap_status plap_solve(const plap_problem* problem, const plap_nonlinearity* nl,
                                const plap_solve_options* options, plap_solution_set** out);
PLAP_API void plap_solution_set_destroy(plap_solution_set* set);

PLAP_API plap_status plap_solution_count(const plap_solution_set* set, size_t* count);
/* Sweep diagnostics (sampled slopes, divergences, rejected candidates). */
PLAP_API plap_status plap_solution_set_report(const plap_solution_set* set, char** json);
PLAP_API plap_status plap_solution_info_get(const plap_solution_set* set, size_t index, plap_solution_info* info);
/* Copies min(capacity, nodes) node/value pairs. */
PLAP_API plap_status plap_solution_values(const plap_solution_set* set, size_t index, double* t, double* v,
                                          size_t capacity);
PLAP_API plap_status plap_solution_write_csv(const plap_solution_set* set, size_t index, const char* path);
/* u on `count` uniform radii from a to b, plus the radial residual of that
 * profile (uses the problem's radial weight when set). */
PLAP_API plap_status plap_solution_pullback(const plap_problem* problem, const plap_solution_set* set,
                                            size_t index, size_t count, double* r, double* u,
                                            double* residual);

#ifdef __cplusplus
}
#endif

#endif
