/*
 * C interface to the robust compressed push-pull simulation library.
 *
 * Every object is an opaque handle created by an rcpp_*_... constructor and
 * released by the matching rcpp_*_free (safe on NULL). Functions report
 * failures through rcpp_status; rcpp_last_error() returns a thread-local
 * message for the most recent failing call on the calling thread. Handles
 * are immutable after construction except rcpp_config, so sharing them
 * across threads for reads is safe.
 */
#ifndef RCPP_RCPP_H
#define RCPP_RCPP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RCPP_API __declspec(dllexport)
#else
#define RCPP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rcpp_status {
    RCPP_OK = 0,
    RCPP_ERROR_INVALID_ARGUMENT = 1,
    RCPP_ERROR_PRECONDITION = 2, /* graph/mixing assumptions violated */
    RCPP_ERROR_DIVERGED = 3,
    RCPP_ERROR_PARSE = 4,
    RCPP_ERROR_IO = 5,
    RCPP_ERROR_UNAVAILABLE = 6, /* e.g. too few points for a rate fit */
    RCPP_ERROR_INTERNAL = 7
} rcpp_status;

RCPP_API const char* rcpp_last_error(void);

typedef struct rcpp_graph rcpp_graph;
typedef struct rcpp_mixing rcpp_mixing;
typedef struct rcpp_problem rcpp_problem;
typedef struct rcpp_config rcpp_config;
typedef struct rcpp_trace rcpp_trace;
typedef struct rcpp_report rcpp_report;

/* ---- directed communication graphs ---------------------------------- */

/* Directed cycle + self-loops + `extra_edges` seeded random chords. */
RCPP_API rcpp_status rcpp_graph_ring(int nodes, int extra_edges, uint64_t seed,
                                     rcpp_graph** out);
/* Edge-list text format: first line `n`, one `i j` line per edge. */
RCPP_API rcpp_status rcpp_graph_load(const char* path, rcpp_graph** out);
RCPP_API rcpp_status rcpp_graph_save(const rcpp_graph* g, const char* path);
RCPP_API int rcpp_graph_nodes(const rcpp_graph* g);
RCPP_API int rcpp_graph_edges(const rcpp_graph* g);
RCPP_API rcpp_status rcpp_graph_strongly_connected(const rcpp_graph* g,
                                                   int* out);
/* Spanning-tree roots in ascending order. Writes up to `capacity`
 * indices into `roots` (may be NULL when capacity is 0); `*count`
 * receives the total number of roots. */
RCPP_API rcpp_status rcpp_graph_roots(const rcpp_graph* g, int* roots,
                                      int capacity, int* count);
RCPP_API void rcpp_graph_free(rcpp_graph* g);

/* ---- mixing matrices ------------------------------------------------- */

typedef enum rcpp_matrix_id { RCPP_MATRIX_R = 0, RCPP_MATRIX_C = 1 } rcpp_matrix_id;
typedef enum rcpp_vector_id { RCPP_VECTOR_UR = 0, RCPP_VECTOR_UC = 1 } rcpp_vector_id;

/* Row-stochastic R over graph_r and column-stochastic C over graph_c with
 * uniform (optionally perturbed) weights; requires the root sets of
 * graph_r and of the reversed graph_c to intersect. */
RCPP_API rcpp_status rcpp_mixing_build(const rcpp_graph* graph_r,
                                       const rcpp_graph* graph_c,
                                       uint64_t seed, double perturb,
                                       rcpp_mixing** out);
RCPP_API int rcpp_mixing_nodes(const rcpp_mixing* m);
RCPP_API rcpp_status rcpp_mixing_entry(const rcpp_mixing* m,
                                       rcpp_matrix_id which, int row, int col,
                                       double* out);
RCPP_API rcpp_status rcpp_mixing_eigvec_entry(const rcpp_mixing* m,
                                              rcpp_vector_id which, int index,
                                              double* out);
RCPP_API void rcpp_mixing_free(rcpp_mixing* m);

/* ---- ridge-regression problems --------------------------------------- */

RCPP_API rcpp_status rcpp_problem_generate(int agents, int dim, double rho,
                                           double noise, uint64_t seed,
                                           rcpp_problem** out);
/* CSV: header `rho=<r>,seed=<s>`, then one `u_1,...,u_p,v` row per agent. */
RCPP_API rcpp_status rcpp_problem_load_csv(const char* path,
                                           rcpp_problem** out);
RCPP_API rcpp_status rcpp_problem_save_csv(const rcpp_problem* p,
                                           const char* path);
RCPP_API int rcpp_problem_agents(const rcpp_problem* p);
RCPP_API int rcpp_problem_dim(const rcpp_problem* p);
/* Copies the oracle minimizer into x_star (capacity >= dim) and the
 * optimal value into f_star; either output may be NULL. */
RCPP_API rcpp_status rcpp_problem_optimum(const rcpp_problem* p,
                                          double* x_star, int capacity,
                                          double* f_star);
RCPP_API rcpp_status rcpp_problem_constants(const rcpp_problem* p,
                                            double* smoothness,
                                            double* pl_constant);
RCPP_API void rcpp_problem_free(rcpp_problem* p);

/* ---- experiment configuration ---------------------------------------- */

RCPP_API rcpp_status rcpp_config_default(rcpp_config** out);
/* Parses and validates; the error message lists every problem found. */
RCPP_API rcpp_status rcpp_config_load(const char* path, rcpp_config** out);
/* `dotted_key` like "algorithm.c"; applied without re-validation. */
RCPP_API rcpp_status rcpp_config_set(rcpp_config* cfg, const char* dotted_key,
                                     const char* value);
RCPP_API rcpp_status rcpp_config_validate(const rcpp_config* cfg);
/* Canonical text round-trips through rcpp_config_load. Returns the
 * required buffer size including the terminator; pass NULL to size. */
RCPP_API size_t rcpp_config_canonical(const rcpp_config* cfg, char* buffer,
                                      size_t capacity);
/* Resolves the output directory: `override` when non-NULL, else an
 * explicitly configured output.directory, else $RCPP_OUT_DIR, else the
 * built-in default. Returns the required size including the terminator. */
RCPP_API size_t rcpp_config_out_dir(const rcpp_config* cfg,
                                    const char* override, char* buffer,
                                    size_t capacity);
RCPP_API void rcpp_config_free(rcpp_config* cfg);

/* ---- runs and traces --------------------------------------------------
 * Trace CSV columns:
 *   k,residual,consensus_err,tracking_err,comp_err_x,comp_err_y,bits_cum
 */

typedef struct rcpp_iter_record {
    int64_t k;
    double residual;
    double consensus_err;
    double tracking_err;
    double comp_err_x;
    double comp_err_y;
    uint64_t bits_cum;
} rcpp_iter_record;

/* Runs `algorithm` ("rcpp", "pushpull" or "rcpp_static") for one seed.
 * On divergence returns RCPP_ERROR_DIVERGED and still hands back the
 * partial trace. */
RCPP_API rcpp_status rcpp_run(const rcpp_config* cfg, const char* algorithm,
                              uint64_t seed, rcpp_trace** out);
RCPP_API int64_t rcpp_trace_length(const rcpp_trace* t);
RCPP_API rcpp_status rcpp_trace_record(const rcpp_trace* t, int64_t index,
                                       rcpp_iter_record* out);
RCPP_API int rcpp_trace_diverged(const rcpp_trace* t);
RCPP_API rcpp_status rcpp_trace_write_csv(const rcpp_trace* t,
                                          const char* path);
/* Log-linear rate fit after `burn_in` iterations (-1: length/10).
 * RCPP_ERROR_UNAVAILABLE when fewer than 10 usable points remain. */
RCPP_API rcpp_status rcpp_trace_fit_rate(const rcpp_trace* t, int64_t burn_in,
                                         double* c_hat, double* r2);
RCPP_API void rcpp_trace_free(rcpp_trace* t);

/* ---- whole experiments ------------------------------------------------ */

/* Runs every (algorithm, seed) combination of the config into `out_dir`:
 * one `<algo>_seed<seed>.csv` per run, `<algo>_mean.csv` per algorithm
 * when several seeds are configured, and `summary.txt`. Outputs are
 * byte-identical for any `workers` value. Divergence is reported in the
 * summary, not as a failure status. */
RCPP_API rcpp_status rcpp_experiment_run(const rcpp_config* cfg,
                                         const char* out_dir, int workers,
                                         rcpp_report** out);
RCPP_API size_t rcpp_report_text(const rcpp_report* r, char* buffer,
                                 size_t capacity);
RCPP_API int rcpp_report_any_diverged(const rcpp_report* r);
RCPP_API void rcpp_report_free(rcpp_report* r);

/* ---- compression-contract certification ------------------------------- */

typedef struct rcpp_certify_outcome {
    double c_rel_hat;
    double sigma2_hat;
    double delta_hat;
    double sigma2_r_hat;
    double c_rel_declared;
    double sigma2_declared;
    double r_declared;
    double delta_declared;
    double sigma2_r_declared;
    int direct_pass; /* declared constants dominate E||C(x)-x||^2 (3 se) */
    int scaled_pass; /* same for the r-scaled contraction form */
} rcpp_certify_outcome;

/* kind: identity | qn | topk | qtn | uniform. `table`, when non-NULL,
 * receives a human-readable per-scale report (truncated to capacity). */
RCPP_API rcpp_status rcpp_certify(const char* kind, int dim, int bits, int k,
                                  double level, long samples, uint64_t seed,
                                  rcpp_certify_outcome* out, char* table,
                                  size_t table_capacity);

#ifdef __cplusplus
}
#endif

#endif /* RCPP_RCPP_H */
