#ifndef NULLCONE_H
#define NULLCONE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum NcStatus {
  NC_STATUS_OK = 0,
  NC_STATUS_NULL_POINTER = 1,
  NC_STATUS_INVALID_UTF8 = 2,
  NC_STATUS_CONFIG_PARSE = 3,
  NC_STATUS_CONFIG_SCHEMA = 4,
  NC_STATUS_CONFIG_SEMANTIC = 5,
  NC_STATUS_INVALID_ARGUMENT = 6,
  NC_STATUS_INSTABILITY = 7,
  NC_STATUS_EXTRACTION = 8,
  NC_STATUS_DIAGNOSTICS = 9,
  NC_STATUS_IO = 10,
  NC_STATUS_PANIC = 11,
} NcStatus;

/**
 * Tables a finished run can render as CSV.
 */
typedef enum NcTable {
  NC_TABLE_ENERGIES = 0,
  NC_TABLE_RADIATION = 1,
  NC_TABLE_CONES = 2,
} NcTable;

/**
 * A parsed, validated run configuration.
 */
typedef struct NcConfig NcConfig;

/**
 * A completed run with its trace, radiation fields and report.
 */
typedef struct NcRun NcRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next `nc_*` call on the same thread.
 */
const char *nc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nc_version(void);

/**
 * Parse and validate a JSON configuration.
 *
 * # Safety
 * `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
 */
enum NcStatus nc_config_parse(const char *json, struct NcConfig **out);

/**
 * The configuration re-serialized as JSON with defaults filled in.
 *
 * # Safety
 * `cfg` must be NULL or a live handle from [`nc_config_parse`].
 */
char *nc_config_to_json(const struct NcConfig *cfg);

/**
 * # Safety
 * `cfg` must be NULL or a handle from [`nc_config_parse`] not yet freed.
 */
void nc_config_free(struct NcConfig *cfg);

/**
 * Evolve, extract and diagnose. A run whose checks fail still returns
 * [`NcStatus::Ok`]; query [`nc_run_passed`].
 *
 * # Safety
 * `cfg` must be NULL or a live config handle; `out` must be NULL or writable.
 */
enum NcStatus nc_run(const struct NcConfig *cfg, struct NcRun **out);

/**
 * 1 if every check passed, 0 if any failed, -1 for a NULL handle.
 *
 * # Safety
 * `run` must be NULL or a live run handle.
 */
int nc_run_passed(const struct NcRun *run);

/**
 * `E(0)` and the total radiated norm `|F|^2` of a run.
 *
 * # Safety
 * `run` must be NULL or a live run handle; the outputs must be NULL or writable.
 */
enum NcStatus nc_run_energy(const struct NcRun *run, double *initial, double *radiated);

/**
 * The run report as JSON, or NULL on failure.
 *
 * # Safety
 * `run` must be NULL or a live run handle.
 */
char *nc_run_report_json(const struct NcRun *run);

/**
 * One of the run's CSV tables, or NULL on failure.
 *
 * # Safety
 * `run` must be NULL or a live run handle.
 */
char *nc_run_csv(const struct NcRun *run, enum NcTable table);

/**
 * Write all output files of a run into `dir`, creating it if needed.
 *
 * # Safety
 * `run` must be NULL or a live run handle; `dir` NULL or NUL-terminated.
 */
enum NcStatus nc_run_write(const struct NcRun *run, const char *dir);

/**
 * # Safety
 * `run` must be NULL or a handle from [`nc_run`] not yet freed.
 */
void nc_run_free(struct NcRun *run);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void nc_string_free(char *s);

/**
 * Tortoise coordinate `r* = r + 2M log(r - 2M)`.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum NcStatus nc_tortoise(double mass, double r, double *out);

/**
 * Areal radius `r > 2M` with tortoise coordinate `r_star`.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum NcStatus nc_tortoise_inverse(double mass, double r_star, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NULLCONE_H */
