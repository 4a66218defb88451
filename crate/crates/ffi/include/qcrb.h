#ifndef QCRB_H
#define QCRB_H

/* Generated by cbindgen from qcrb-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum qcrb_status {
  QCRB_STATUS_OK = 0,
  // A required pointer argument was null.
  QCRB_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  QCRB_STATUS_INVALID_UTF8 = 2,
  // Config parse/validation failure.
  QCRB_STATUS_CONFIG = 3,
  // Model degeneracy: no detection mode or no information.
  QCRB_STATUS_DEGENERATE = 4,
  // Numerical failure (singular covariance, coverage, step size).
  QCRB_STATUS_NUMERIC = 5,
  QCRB_STATUS_IO = 6,
  QCRB_STATUS_INTERNAL = 7,
} qcrb_status;

// Opaque model handle: a parsed model config ready for evaluation.
typedef struct qcrb_model qcrb_model;

// Sensitivity report with every quantity the bound pipeline produces.
// Optional quantities (absent when the model has no detection mode) are
// NaN.
typedef struct qcrb_bound_report {
  double i_mean_term;
  double i_cov_term;
  double i_full;
  double cov_term_ratio;
  double i_reduced;
  double i_zero;
  double gamma_inv_11;
  double n;
  double u_prime_norm_sq;
  double n_prime;
  uint64_t q;
  double delta_theta_min;
  double delta_theta_single;
  double bound_linearized;
} qcrb_bound_report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *qcrb_version(void);

// Message for the most recent error on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *qcrb_last_error_message(void);

// Release a string returned through an out-parameter.
//
// # Safety
// `s` must have been produced by this library and not freed before.
void qcrb_string_free(char *s);

// Parse a model config (same JSON schema as the CLI `bound` command) into
// an opaque handle.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` must be a valid
// pointer to receive the handle.
enum qcrb_status qcrb_model_from_json(const char *json, struct qcrb_model **out);

// Release a model handle.
//
// # Safety
// `model` must come from `qcrb_model_from_json` and not be freed twice.
void qcrb_model_free(struct qcrb_model *model);

// Quantum Cramér-Rao bound of the model for `q` repetitions.
//
// # Safety
// `model` must be a live handle; `out` must point to writable memory for
// one report struct.
enum qcrb_status qcrb_bound(const struct qcrb_model *model,
                            uint64_t q,
                            struct qcrb_bound_report *out);

// Same as [`qcrb_bound`] but returning the full JSON report.
//
// # Safety
// As for `qcrb_bound`; `out_json` receives a string owned by the caller.
enum qcrb_status qcrb_bound_json(const struct qcrb_model *model, uint64_t q, char **out_json);

// Optimal-resource bound `σ_min/√(QN) (4‖u′‖² + (N′/N)²)^{−1/2}`.
//
// # Safety
// `out` must point to a writable f64.
enum qcrb_status qcrb_optimal_bound(double sigma_min,
                                    double n,
                                    double u_prime_norm_sq,
                                    double n_prime,
                                    uint64_t q,
                                    double *out);

// Run a homodyne experiment from a CLI-schema `simulate` config and return
// the summary report as JSON.
//
// # Safety
// `config_json` must be a valid NUL-terminated string; `out_json` receives
// a caller-owned string.
enum qcrb_status qcrb_simulate_json(const char *config_json, char **out_json);

// Optimize a squeezer allocation and audit random networks, from a
// CLI-schema `allocate` config; returns the outcome as JSON.
//
// # Safety
// As for [`qcrb_simulate_json`].
enum qcrb_status qcrb_allocate_json(const char *config_json, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCRB_H */
