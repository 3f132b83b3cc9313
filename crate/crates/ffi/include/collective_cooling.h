#ifndef COLLECTIVE_COOLING_H
#define COLLECTIVE_COOLING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_ARGUMENT = 2,
  CC_STATUS_INVALID_CONFIG = 3,
  CC_STATUS_NUMERICAL = 4,
  CC_STATUS_CUTOFF_EXCEEDED = 5,
  CC_STATUS_IO = 6,
  CC_STATUS_OUT_OF_RANGE = 7,
  CC_STATUS_PANIC = 8,
} CcStatus;

typedef enum CcScenario {
  CC_SCENARIO_COMMON = 0,
  CC_SCENARIO_INDIVIDUAL = 1,
} CcScenario;

// A scenario configuration.
typedef struct CcConfig CcConfig;

// Physical parameters.
typedef struct CcParams CcParams;

// The trajectory table and report of a finished run.
typedef struct CcRun CcRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *cc_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void cc_string_free(char *s);

// Creates a parameter set; `rabi` and `trap_freqs` each hold `modes` values.
//
// # Safety
// The arrays must hold `modes` readable values and `out` must be writable.
enum CcStatus cc_params_new(uint64_t n_particles,
                            double g,
                            double kappa,
                            double eta,
                            const double *rabi,
                            const double *trap_freqs,
                            size_t modes,
                            struct CcParams **out);

// Sets the spontaneous decay rate used by the regime report.
//
// # Safety
// `params` must be a live handle.
enum CcStatus cc_params_set_gamma(struct CcParams *params, double gamma);

// # Safety
// `params` must be null or a handle from [`cc_params_new`] not yet freed.
void cc_params_free(struct CcParams *params);

// Collective couplings `x` and `y`.
//
// # Safety
// `params` must be a live handle and the out-pointers writable.
enum CcStatus cc_couplings(const struct CcParams *params, double *x, double *y);

// Predicted common-mode and individual-mode cooling rates.
//
// # Safety
// `params` must be a live handle and the out-pointers writable.
enum CcStatus cc_analytic_rates(const struct CcParams *params,
                                double *rate_common,
                                double *rate_individual);

// Moment-equation vector field at `state = (m, n, s3, u1, u2, k3)`.
//
// # Safety
// `state` must hold 6 readable values, `out` 6 writable ones.
enum CcStatus cc_moment_rhs(const struct CcParams *params,
                            enum CcScenario scenario,
                            const double *state,
                            double *out);

// Parses and validates a JSON scenario configuration.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum CcStatus cc_config_from_json(const char *json, struct CcConfig **out);

// Loads a built-in preset by name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
enum CcStatus cc_config_from_preset(const char *name, struct CcConfig **out);

// Replaces the physical parameters of a configuration.
//
// # Safety
// Both handles must be live.
enum CcStatus cc_config_set_params(struct CcConfig *config, const struct CcParams *params);

// Sets the simulated duration.
//
// # Safety
// `config` must be a live handle.
enum CcStatus cc_config_set_t_end(struct CcConfig *config, double t_end);

// Serializes a configuration to JSON; free the result with [`cc_string_free`].
//
// # Safety
// `config` must be a live handle and `out` writable.
enum CcStatus cc_config_to_json(const struct CcConfig *config, char **out);

// # Safety
// `config` must be null or a live handle.
void cc_config_free(struct CcConfig *config);

// Runs a scenario. A finished run whose rate comparison misses its
// tolerance still returns [`CcStatus::Ok`]; query [`cc_run_passed`].
//
// # Safety
// `config` must be a live handle and `out` writable.
enum CcStatus cc_run_scenario(const struct CcConfig *config, struct CcRun **out);

// Number of recorded rows, or 0 for a null handle.
//
// # Safety
// `run` must be null or a live handle.
size_t cc_run_rows(const struct CcRun *run);

// Number of columns, or 0 for a null handle.
//
// # Safety
// `run` must be null or a live handle.
size_t cc_run_columns(const struct CcRun *run);

// 1 when the rate comparison passed, 0 otherwise or for a null handle.
//
// # Safety
// `run` must be null or a live handle.
int32_t cc_run_passed(const struct CcRun *run);

// Name of column `col`; free with [`cc_string_free`].
//
// # Safety
// `run` must be a live handle and `out` writable.
enum CcStatus cc_run_column_name(const struct CcRun *run, size_t col, char **out);

// Value at (`row`, `col`).
//
// # Safety
// `run` must be a live handle and `out` writable.
enum CcStatus cc_run_value(const struct CcRun *run, size_t row, size_t col, double *out);

// Copies column `col` into `buf`, which must hold [`cc_run_rows`] values.
//
// # Safety
// `run` must be a live handle and `buf` writable for `len` values.
enum CcStatus cc_run_copy_column(const struct CcRun *run, size_t col, double *buf, size_t len);

// JSON report of the run; borrowed, valid until the handle is freed.
//
// # Safety
// `run` must be null or a live handle.
const char *cc_run_report_json(const struct CcRun *run);

// # Safety
// `run` must be null or a live handle.
void cc_run_free(struct CcRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLLECTIVE_COOLING_H */
