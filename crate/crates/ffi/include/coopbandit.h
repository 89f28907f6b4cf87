#ifndef COOPBANDIT_H
#define COOPBANDIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible calls.
 */
typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_POINTER = 1,
  CB_STATUS_INVALID_UTF8 = 2,
  CB_STATUS_CONFIG_ERROR = 3,
  CB_STATUS_GRAPH_ERROR = 4,
  CB_STATUS_SIMULATION_ERROR = 5,
  CB_STATUS_BUFFER_TOO_SMALL = 6,
  CB_STATUS_PANIC = 7,
} CbStatus;

/**
 * A validated experiment configuration.
 */
typedef struct CbExperiment CbExperiment;

/**
 * A generated communication graph.
 */
typedef struct CbGraph CbGraph;

/**
 * Aggregated regret curves from one experiment.
 */
typedef struct CbResult CbResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cb_version(void);

/**
 * Copy of the last error message on this thread, or NULL if the last call
 * succeeded. Free with [`cb_string_free`].
 */
char *cb_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void cb_string_free(char *s);

/**
 * Upper confidence index of an arm. Infinite when `count` is zero.
 */
double cb_ucb_index(double mean, uint64_t count, uint64_t t, double xi, double sigma);

/**
 * Parses and validates an experiment config in JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CbStatus cb_experiment_from_json(const char *json, struct CbExperiment **out);

/**
 * Overrides the master seed.
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum CbStatus cb_experiment_set_seed(struct CbExperiment *exp, uint64_t seed);

/**
 * Sets a sweepable numeric parameter such as `link_p` or `epsilon`.
 *
 * # Safety
 * `exp` must be a live handle and `name` a NUL-terminated string.
 */
enum CbStatus cb_experiment_set_param(struct CbExperiment *exp, const char *name, double value);

/**
 * Runs every repetition and aggregates the regret curves.
 *
 * # Safety
 * `exp` must be a live handle; `out` must be writable.
 */
enum CbStatus cb_experiment_run(const struct CbExperiment *exp, struct CbResult **out);

/**
 * # Safety
 * `exp` must be NULL or a handle not yet freed.
 */
void cb_experiment_free(struct CbExperiment *exp);

/**
 * Number of rounds in the result curves, 0 for NULL.
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
uint64_t cb_result_horizon(const struct CbResult *res);

/**
 * Mean cumulative regret at the horizon, NaN for NULL.
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
double cb_result_final_mean(const struct CbResult *res);

/**
 * Copies the per-round mean curve into `buf`, which must hold at least
 * `cb_result_horizon` values.
 *
 * # Safety
 * `res` must be a live handle and `buf` valid for `len` writes.
 */
enum CbStatus cb_result_copy_mean(const struct CbResult *res, double *buf, size_t len);

/**
 * Copies the per-round standard deviation curve into `buf`.
 *
 * # Safety
 * `res` must be a live handle and `buf` valid for `len` writes.
 */
enum CbStatus cb_result_copy_std(const struct CbResult *res, double *buf, size_t len);

/**
 * The result rendered as CSV. Free with [`cb_string_free`].
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
char *cb_result_csv(const struct CbResult *res);

/**
 * # Safety
 * `res` must be NULL or a handle not yet freed.
 */
void cb_result_free(struct CbResult *res);

/**
 * Generates a graph from a spec string such as `erdos_renyi(20,0.5)`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum CbStatus cb_graph_generate(const char *spec, uint64_t seed, struct CbGraph **out);

/**
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t cb_graph_node_count(const struct CbGraph *g);

/**
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t cb_graph_edge_count(const struct CbGraph *g);

/**
 * Graph statistics as `key=value` lines. Free with [`cb_string_free`].
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
char *cb_graph_stats(const struct CbGraph *g);

/**
 * # Safety
 * `g` must be NULL or a handle not yet freed.
 */
void cb_graph_free(struct CbGraph *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COOPBANDIT_H */
