#ifndef TORUSDIV_H
#define TORUSDIV_H

/* Generated by cbindgen from src/lib.rs. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  /**
   * The computation ran and the answer is a refusal or a counterexample.
   */
  TD_STATUS_NEGATIVE = 1,
  TD_STATUS_INVALID_ARGUMENT = 2,
  TD_STATUS_PARSE = 3,
  TD_STATUS_FACTORIZATION = 4,
  TD_STATUS_INTERNAL = 5,
} TdStatus;

/**
 * A parsed problem instance.
 */
typedef struct TdInstance TdInstance;

/**
 * A JSON report with a NUL-terminated copy for C callers.
 */
typedef struct TdReport TdReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; empty if none. Valid until
 * the next call into this library from the same thread.
 */
const char *td_last_error(void);

const char *td_version(void);

/**
 * Parses an instance `{s_primes, g1, g2, F1, F2, components1?, components2?}`.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is valid for a write.
 */
enum TdStatus td_instance_from_json(const char *json, struct TdInstance **out);

/**
 * # Safety
 * `inst` is null or a handle not yet freed.
 */
void td_instance_free(struct TdInstance *inst);

/**
 * The report text, owned by `report`.
 *
 * # Safety
 * `report` is null or a live report handle.
 */
const char *td_report_json(const struct TdReport *report);

/**
 * # Safety
 * `report` is null or a handle not yet freed.
 */
void td_report_free(struct TdReport *report);

/**
 * Reconstructs a monomial map; `Negative` with a diagnostic on refusal.
 *
 * # Safety
 * `inst` is a live instance handle; `out` is valid for a write.
 */
enum TdStatus td_certify_morphism(const struct TdInstance *inst,
                                  uint64_t n_max,
                                  struct TdReport **out);

/**
 * # Safety
 * `inst` is a live instance handle; `out` is valid for a write.
 */
enum TdStatus td_certify_gene(const struct TdInstance *inst, struct TdReport **out);

/**
 * # Safety
 * `inst` is a live instance handle; `out` is valid for a write.
 */
enum TdStatus td_bbs_conclusion(const struct TdInstance *inst,
                                uint64_t n_max,
                                struct TdReport **out);

/**
 * All `n ≤ n_max` with `F1(g1ⁿ) | F2(g2ⁿ)` in the S-integers.
 *
 * # Safety
 * `inst` is a live instance handle; `out` is valid for a write.
 */
enum TdStatus td_scan_ideal(const struct TdInstance *inst, uint64_t n_max, struct TdReport **out);

/**
 * Prime support of `xⁿ − 1` inside that of `yⁿ − 1` for `n ≤ n_max`;
 * `Negative` when a violation or a factorization failure stops the scan.
 *
 * # Safety
 * `out` is valid for a write.
 */
enum TdStatus td_erdos(uint64_t x, uint64_t y, uint64_t n_max, struct TdReport **out);

/**
 * Stabilizer of `poly = 0` in `G_m^dim`. `factors` may be null; otherwise
 * it receives up to `cap` invariant factors (saturating at `u64::MAX`) and
 * `n_factors` the total count.
 *
 * # Safety
 * `poly` is NUL-terminated; `dimension` and `n_factors` are valid for a
 * write; `factors` is null or valid for `cap` writes.
 */
enum TdStatus td_stabilizer(const char *poly,
                            size_t dim,
                            size_t *dimension,
                            uint64_t *factors,
                            size_t cap,
                            size_t *n_factors);

/**
 * `N(r)` for a zero set in the JSON form `{parts: [{offset, periods}]}`.
 *
 * # Safety
 * `zero_set` is NUL-terminated; `out` is valid for a write.
 */
enum TdStatus td_counting_function(const char *zero_set, double r, double *out);

/**
 * Number of distinct zeros with `|z| ≤ t`.
 *
 * # Safety
 * `zero_set` is NUL-terminated; `out` is valid for a write.
 */
enum TdStatus td_unreduced_count(const char *zero_set, double t, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORUSDIV_H */
