#ifndef NC_ERGODIC_H
#define NC_ERGODIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible calls.
 */
typedef enum {
  NCE_STATUS_OK = 0,
  NCE_STATUS_NULL_POINTER = 1,
  NCE_STATUS_INVALID_UTF8 = 2,
  NCE_STATUS_SCHEMA = 3,
  NCE_STATUS_VALIDATION = 4,
  NCE_STATUS_NUMERICAL = 5,
  NCE_STATUS_IO = 6,
  NCE_STATUS_NOT_FOUND = 7,
  NCE_STATUS_BUFFER_TOO_SMALL = 8,
  NCE_STATUS_PANIC = 99,
} NceStatus;

typedef struct NceDecomposition NceDecomposition;

typedef struct NceReport NceReport;

typedef struct NceScenario NceScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nce_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on this thread.
 */
const char *nce_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void nce_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
NceStatus nce_scenario_from_json(const char *json, NceScenario **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
NceStatus nce_scenario_from_file(const char *path, NceScenario **out);

/**
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
NceStatus nce_scenario_from_gallery(const char *name, NceScenario **out);

/**
 * # Safety
 * `s` must be a live scenario handle.
 */
NceStatus nce_scenario_set_seed(NceScenario *s, uint64_t seed);

/**
 * Serialized scenario (pretty JSON).
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
NceStatus nce_scenario_to_json(const NceScenario *s, char **out);

/**
 * # Safety
 * `s` must be null or a scenario handle not yet freed.
 */
void nce_scenario_free(NceScenario *s);

size_t nce_gallery_count(void);

/**
 * # Safety
 * `out` must be writable.
 */
NceStatus nce_gallery_name(size_t index, char **out);

/**
 * Runs every task of the scenario. Task failures are recorded in the
 * report; only an invalid scenario returns an error.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
NceStatus nce_run(const NceScenario *s, NceReport **out);

/**
 * True when every check and task verdict passed; false for null.
 *
 * # Safety
 * `r` must be null or a live report handle.
 */
bool nce_report_all_pass(const NceReport *r);

/**
 * # Safety
 * `r` must be a live report handle; `out` must be writable.
 */
NceStatus nce_report_to_json(const NceReport *r, char **out);

/**
 * Writes the report in `format` (`report-json`, `decay-csv` or
 * `spectrum-csv`) into directory `dir`.
 *
 * # Safety
 * `r` must be a live report handle; strings must be NUL-terminated.
 */
NceStatus nce_report_emit(const NceReport *r, const char *format, const char *dir);

/**
 * Copies the decomposition computed by the report's `decompose` (or
 * `stochastic`) task. `NotFound` when none ran successfully.
 *
 * # Safety
 * `r` must be a live report handle; `out` must be writable.
 */
NceStatus nce_report_decomposition(const NceReport *r, NceDecomposition **out);

/**
 * # Safety
 * `r` must be null or a report handle not yet freed.
 */
void nce_report_free(NceReport *r);

/**
 * Total matrix size `N` (sum of block sizes); 0 for null.
 *
 * # Safety
 * `d` must be null or a live decomposition handle.
 */
size_t nce_decomposition_size(const NceDecomposition *d);

/**
 * # Safety
 * `d` must be null or a live decomposition handle.
 */
size_t nce_decomposition_rank_e1(const NceDecomposition *d);

/**
 * # Safety
 * `d` must be null or a live decomposition handle.
 */
size_t nce_decomposition_rank_e2(const NceDecomposition *d);

/**
 * # Safety
 * `d` must be null or a live decomposition handle.
 */
bool nce_decomposition_passed(const NceDecomposition *d);

/**
 * `e₁` (`which = 1`) or `e₂` (`which = 2`) as a dense `N × N` row-major
 * matrix of interleaved `(re, im)` pairs: `2N²` doubles.
 *
 * # Safety
 * `d` must be a live decomposition handle; `buf` must hold `len` doubles;
 * `needed` may be null.
 */
NceStatus nce_decomposition_projection(const NceDecomposition *d,
                                       uint32_t which,
                                       double *buf,
                                       size_t len,
                                       size_t *needed);

/**
 * Decay table as `(a, norm)` pairs: `2 · points` doubles.
 *
 * # Safety
 * As for [`nce_decomposition_projection`].
 */
NceStatus nce_decomposition_decay(const NceDecomposition *d,
                                  double *buf,
                                  size_t len,
                                  size_t *needed);

/**
 * # Safety
 * `d` must be null or a decomposition handle not yet freed.
 */
void nce_decomposition_free(NceDecomposition *d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NC_ERGODIC_H */
