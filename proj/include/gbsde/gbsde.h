/*
 Copyright 2026 gbsde contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef GBSDE_GBSDE_H
#define GBSDE_GBSDE_H

/*
 * C interface to the G-BSDE solver.
 *
 * Every function returns a gbsde_status. On failure the message is available from
 * gbsde_last_error() on the same thread until the next call. Handles are opaque, owned by
 * the caller, and released with the matching *_free function (NULL is accepted).
 *
 * Expressions use variables t, x, y, z; operators + - * / ^; unary minus; functions abs,
 * exp, tanh, pos, neg, min, max.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GBSDE_API __declspec(dllexport)
#else
#define GBSDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gbsde_status {
    GBSDE_OK = 0,
    GBSDE_INVALID_ARGUMENT = 1,
    GBSDE_DOMAIN = 2,
    GBSDE_CFL = 3,
    GBSDE_NUMERICAL = 4,
    GBSDE_PARSE = 5,
    GBSDE_BUDGET = 6,
    GBSDE_IO = 7,
    GBSDE_MISMATCH = 8,
    GBSDE_INTERNAL = 99
} gbsde_status;

typedef struct gbsde_expression gbsde_expression;
typedef struct gbsde_problem gbsde_problem;
typedef struct gbsde_solution gbsde_solution;
typedef struct gbsde_paths gbsde_paths;
typedef struct gbsde_two_epoch gbsde_two_epoch;
typedef struct gbsde_reports gbsde_reports;

GBSDE_API const char* gbsde_version(void);
GBSDE_API const char* gbsde_last_error(void);
GBSDE_API const char* gbsde_status_name(gbsde_status status);

/* ---- scalar helpers ---------------------------------------------------- */

/* G(a) = (sigma_hi^2 a+ - sigma_lo^2 a-) / 2 */
GBSDE_API gbsde_status gbsde_g_function(double a, double sigma_lo, double sigma_hi, double* out);
/* Explicit constant C_alpha of the representation inequality for (alpha, delta). */
GBSDE_API gbsde_status gbsde_song_constant(double alpha, double delta, double* out);

/* ---- expressions -------------------------------------------------------- */

GBSDE_API gbsde_status gbsde_expression_parse(const char* source, gbsde_expression** out);
GBSDE_API gbsde_status gbsde_expression_eval(const gbsde_expression* e, double t, double x, double y, double z,
                                             double* out);
/* Copies a NUL-terminated string into buf when it fits; *needed receives the full length + 1. */
GBSDE_API gbsde_status gbsde_expression_print(const gbsde_expression* e, char* buf, size_t cap, size_t* needed);
GBSDE_API gbsde_status gbsde_expression_dump(const gbsde_expression* e, char* buf, size_t cap, size_t* needed);
GBSDE_API void gbsde_expression_free(gbsde_expression* e);

/* ---- problems ----------------------------------------------------------- */

/* nt = 0 picks the smallest stable time step count; the space domain is
   [-w, w] with w = width_mult * sigma_hi * sqrt(horizon). */
GBSDE_API gbsde_status gbsde_problem_create(double sigma_lo, double sigma_hi, double horizon, int nx, int nt,
                                            double width_mult, gbsde_problem** out);
GBSDE_API void gbsde_problem_free(gbsde_problem* p);

/* kind: "linear" (a = p1, b = p2), "square" (p1), "call" (strike p1), "put" (strike p1),
   "butterfly" (center p1, half width p2). */
GBSDE_API gbsde_status gbsde_problem_set_payoff(gbsde_problem* p, const char* kind, double p1, double p2);
/* Payoff expression in x with a user-supplied Lipschitz constant (may be INFINITY). */
GBSDE_API gbsde_status gbsde_problem_set_payoff_expr(gbsde_problem* p, const char* expr, double lipschitz);
/* f and g in (t, y, z); either may be NULL or empty for zero. sup_abs < 0 means unknown. */
GBSDE_API gbsde_status gbsde_problem_set_generator(gbsde_problem* p, const char* f_expr, const char* g_expr,
                                                   double lipschitz, double sup_abs);
/* Increases nt until time t is a grid node. */
GBSDE_API gbsde_status gbsde_problem_align_time(gbsde_problem* p, double t);
GBSDE_API gbsde_status gbsde_problem_grid(const gbsde_problem* p, int* nx, int* nt, double* x_lo, double* x_hi,
                                          double* horizon);
GBSDE_API gbsde_status gbsde_problem_refine(gbsde_problem* p);
GBSDE_API gbsde_status gbsde_problem_payoff(const gbsde_problem* p, double x, double* out);
/* Largest payoff slope and generator slope seen on the grid (advisory). */
GBSDE_API gbsde_status gbsde_problem_observed_lipschitz(const gbsde_problem* p, double* payoff_slope,
                                                        double* generator_slope);

/* ---- Markovian solve ---------------------------------------------------- */

GBSDE_API gbsde_status gbsde_solve(const gbsde_problem* p, gbsde_solution** out);
GBSDE_API void gbsde_solution_free(gbsde_solution* s);
GBSDE_API gbsde_status gbsde_solution_y0(const gbsde_solution* s, double* out);
/* Values at time node k and space node j; any output pointer may be NULL. */
GBSDE_API gbsde_status gbsde_solution_node(const gbsde_solution* s, int k, int j, double* u, double* ux,
                                           double* uxx);
GBSDE_API gbsde_status gbsde_solution_interpolate(const gbsde_solution* s, int k, double x, double* u);

/* ---- lattice expectation ------------------------------------------------ */

/* E[phi(B_{t1}, B_{t2} - B_{t1}, ...)] with m <= 3 observation times; phi uses x, y, z for
   the first, second and third increment. */
GBSDE_API gbsde_status gbsde_g_expectation(const gbsde_problem* p, int m, const double* times, const char* phi,
                                           double* out);
/* Conditional expectation given the first i increments, tabulated on nx^i nodes (row-major). */
GBSDE_API gbsde_status gbsde_conditional_g_expectation(const gbsde_problem* p, int m, const double* times,
                                                       const char* phi, int i, double* values, size_t cap,
                                                       size_t* count);

/* ---- paths -------------------------------------------------------------- */

/* control: "constant:h", "random:i" (i-th member of the seeded random family),
   "piecewise:t0=h0;t1=h1;..." or "bang_bang" (needs a solution). */
GBSDE_API gbsde_status gbsde_paths_simulate(const gbsde_problem* p, const gbsde_solution* s, const char* control,
                                            int n_paths, uint64_t seed, gbsde_paths** out);
GBSDE_API void gbsde_paths_free(gbsde_paths* paths);
GBSDE_API gbsde_status gbsde_paths_info(const gbsde_paths* paths, int* n_paths, int* nt);
/* Arrays b and qv hold nt + 1 entries, rate holds nt; any may be NULL. */
GBSDE_API gbsde_status gbsde_paths_get(const gbsde_paths* paths, int path, double* b, double* qv, double* rate);
/* Mean and standard error of the terminal payoff under the bundle's control. */
GBSDE_API gbsde_status gbsde_mc_bound(const gbsde_problem* p, const gbsde_paths* paths, double* mean,
                                      double* stderr_out);

/* (Y, Z, K) along one path (arrays of nt + 1), its residual and clamped node count. */
GBSDE_API gbsde_status gbsde_triple(const gbsde_solution* s, const gbsde_paths* paths, int path, double* y,
                                    double* z, double* k, double* residual, int* clamped);

/* ---- two epochs --------------------------------------------------------- */

/* xi = psi(B_{t1}, B_T - B_{t1}), psi in x and y; grid and generator from the problem. */
GBSDE_API gbsde_status gbsde_two_epoch_solve(const gbsde_problem* p, double t1, const char* psi,
                                             gbsde_two_epoch** out);
GBSDE_API void gbsde_two_epoch_free(gbsde_two_epoch* te);
GBSDE_API gbsde_status gbsde_two_epoch_info(const gbsde_two_epoch* te, double* y0, int* nt, int* k1);
/* Pasted value u(t1, x_i, 0) on the nx space nodes. */
GBSDE_API gbsde_status gbsde_two_epoch_y_t1(const gbsde_two_epoch* te, double* values, size_t cap);
/* Member frozen at node i, time level k of [t1, T], all nx space nodes. */
GBSDE_API gbsde_status gbsde_two_epoch_member_slice(const gbsde_two_epoch* te, int i, int k, double* values,
                                                    size_t cap);
/* Early epoch surface at time level k <= k1. */
GBSDE_API gbsde_status gbsde_two_epoch_early_slice(const gbsde_two_epoch* te, int k, double* values, size_t cap);
/* Paths must come from a problem aligned with gbsde_problem_align_time(t1). */
GBSDE_API gbsde_status gbsde_two_epoch_triple(const gbsde_two_epoch* te, const gbsde_paths* paths, int path,
                                              double* y, double* z, double* k, double* residual, int* clamped);

/* ---- verification ------------------------------------------------------- */

typedef struct gbsde_verify_options {
    double alpha;
    double eps;
    double lw; /* NaN: generator Lipschitz constant */
    int kappa_steps;
    int n_controls;
    int n_paths;
    uint64_t seed;
    double grid_tolerance;
    const char* perturbation;        /* f1 - f2 in (t, y, z) for the stability check, or NULL */
    const char* payoff_perturbation; /* terminal perturbation in x, or NULL */
} gbsde_verify_options;

GBSDE_API void gbsde_verify_options_init(gbsde_verify_options* o);
/* names: comma separated check names, or "all". */
GBSDE_API gbsde_status gbsde_verify(const gbsde_problem* p, const gbsde_verify_options* o, const char* names,
                                    gbsde_reports** out);
GBSDE_API void gbsde_reports_free(gbsde_reports* r);
GBSDE_API size_t gbsde_reports_count(const gbsde_reports* r);
GBSDE_API gbsde_status gbsde_reports_get(const gbsde_reports* r, size_t i, const char** name, int* pass,
                                         double* measured, double* bound, double* tolerance);
GBSDE_API gbsde_status gbsde_reports_grid(const gbsde_reports* r, size_t i, int* nx, int* nt, double* horizon,
                                          double* dx, double* dt);
GBSDE_API size_t gbsde_reports_detail_count(const gbsde_reports* r, size_t i);
GBSDE_API gbsde_status gbsde_reports_detail(const gbsde_reports* r, size_t i, size_t j, const char** key,
                                            double* value);

/* ---- refinement study --------------------------------------------------- */

typedef struct gbsde_convergence_row {
    int level;
    int nx;
    int nt;
    double y0;
    double abs_err;
    double max_residual;
    double order; /* NaN where undefined */
} gbsde_convergence_row;

GBSDE_API gbsde_status gbsde_convergence(const gbsde_problem* p, int levels, const char* control, int n_paths,
                                         uint64_t seed, gbsde_convergence_row* rows, size_t cap, size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* GBSDE_GBSDE_H */
