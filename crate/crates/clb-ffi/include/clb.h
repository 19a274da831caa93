#ifndef CLB_H
#define CLB_H

/* Generated from the clb-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible entry point. Nonzero codes mirror the CLI exit
 * statuses where one exists.
 */
typedef enum ClbStatus {
  CLB_STATUS_OK = 0,
  CLB_STATUS_IO = 1,
  CLB_STATUS_CONFIG = 2,
  CLB_STATUS_RESOURCE_CAP = 3,
  CLB_STATUS_NUMERIC = 4,
  CLB_STATUS_NULL_ARGUMENT = 5,
  CLB_STATUS_INVALID_UTF8 = 6,
  CLB_STATUS_INTERNAL = 7,
} ClbStatus;

/**
 * Completed run: owns the CSV artifact text.
 */
typedef struct ClbArtifact ClbArtifact;

/**
 * Pending invocation of one command: parameter overrides, optional config
 * file, and seed.
 */
typedef struct ClbRunConfig ClbRunConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *clb_status_message(enum ClbStatus status);

/**
 * Detailed message from the most recent failure on this thread, or null if
 * none has occurred. The pointer stays valid until the next failing call on
 * the same thread.
 */
const char *clb_last_error_message(void);

/**
 * Create a run configuration for `command` (one of the CLI command names).
 * On success `*out` owns the handle; release it with `clb_run_config_free`.
 *
 * # Safety
 * `command`, if non-null, must point to a NUL-terminated string; `out`, if
 * non-null, must be valid for writing one pointer.
 */
enum ClbStatus clb_run_config_new(const char *command, struct ClbRunConfig **out);

/**
 * Set one parameter override, using the same keys as the config file.
 * Unknown keys are rejected when the run executes.
 *
 * # Safety
 * `cfg`, if non-null, must be a live handle from `clb_run_config_new`;
 * `key` and `value`, if non-null, must point to NUL-terminated strings.
 */
enum ClbStatus clb_run_config_set(struct ClbRunConfig *cfg, const char *key, const char *value);

/**
 * Set the seed recorded in the provenance header (default 42).
 *
 * # Safety
 * `cfg`, if non-null, must be a live handle from `clb_run_config_new`.
 */
enum ClbStatus clb_run_config_set_seed(struct ClbRunConfig *cfg, uint64_t seed);

/**
 * Point the run at an INI config file; explicit overrides still win.
 *
 * # Safety
 * `cfg`, if non-null, must be a live handle from `clb_run_config_new`;
 * `path`, if non-null, must point to a NUL-terminated string.
 */
enum ClbStatus clb_run_config_set_config_file(struct ClbRunConfig *cfg, const char *path);

/**
 * Release a run configuration. Null is ignored.
 *
 * # Safety
 * `cfg` must be null or a handle from `clb_run_config_new` not yet freed.
 */
void clb_run_config_free(struct ClbRunConfig *cfg);

/**
 * Execute the configured command. On success `*out` owns the artifact;
 * release it with `clb_artifact_free`.
 *
 * # Safety
 * `cfg`, if non-null, must be a live handle from `clb_run_config_new`;
 * `out`, if non-null, must be valid for writing one pointer.
 */
enum ClbStatus clb_run_execute(const struct ClbRunConfig *cfg, struct ClbArtifact **out);

/**
 * NUL-terminated CSV text of a completed run; valid until the artifact is
 * freed. Returns null for a null artifact.
 *
 * # Safety
 * `artifact`, if non-null, must be a live handle from `clb_run_execute`.
 */
const char *clb_artifact_csv(const struct ClbArtifact *artifact);

/**
 * Length of the CSV text in bytes, excluding the terminating NUL.
 *
 * # Safety
 * `artifact`, if non-null, must be a live handle from `clb_run_execute`.
 */
size_t clb_artifact_len(const struct ClbArtifact *artifact);

/**
 * Release an artifact. Null is ignored.
 *
 * # Safety
 * `artifact` must be null or a handle from `clb_run_execute` not yet freed.
 */
void clb_artifact_free(struct ClbArtifact *artifact);

/**
 * Per-step success probability needed to finish `steps` post-selected steps
 * on a grid of `grid_points` sites at truncation order `order` (natural-log
 * qubit accounting).
 *
 * # Safety
 * `out`, if non-null, must be valid for writing one double.
 */
enum ClbStatus clb_min_success_probability(double grid_points,
                                           uint64_t steps,
                                           uint32_t order,
                                           double *out);

/**
 * Qubit count for an order-`order` lifting of a grid with `grid_points`
 * sites.
 *
 * # Safety
 * `out`, if non-null, must be valid for writing one 64-bit integer.
 */
enum ClbStatus clb_qubit_count(double grid_points, uint32_t order, uint64_t *out);

/**
 * Largest number of post-selected steps whose success floor stays under the
 * ancilla ceiling; -1 means unbounded (zero ancillas).
 *
 * # Safety
 * `out`, if non-null, must be valid for writing one 64-bit integer.
 */
enum ClbStatus clb_max_steps(double grid_points, uint32_t order, uint32_t ancillas, int64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLB_H */
