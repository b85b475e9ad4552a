#ifndef BAFO_H
#define BAFO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BafoStatus {
  BAFO_STATUS_OK = 0,
  BAFO_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: bad JSON, invalid instance, bad order or strategy.
   */
  BAFO_STATUS_INVALID = 2,
  BAFO_STATUS_BUDGET_EXCEEDED = 3,
  BAFO_STATUS_PANIC = 4,
} BafoStatus;

typedef enum BafoFormat {
  BAFO_FORMAT_NYB = 0,
  BAFO_FORMAT_DESCENDING = 1,
} BafoFormat;

/**
 * Opaque instance handle.
 */
typedef struct BafoInstance BafoInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON instance. On success `*out` receives a handle to release
 * with [`bafo_instance_free`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BafoStatus bafo_instance_from_json(const char *json, struct BafoInstance **out);

/**
 * # Safety
 * `inst` must come from [`bafo_instance_from_json`] and not be freed twice.
 */
void bafo_instance_free(struct BafoInstance *inst);

/**
 * Seller count, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t bafo_instance_n(const struct BafoInstance *inst);

/**
 * Welfare-maximizing winner set as a bit mask (bit i = seller i).
 *
 * # Safety
 * `inst` must be a live handle and `out_mask` a valid pointer.
 */
enum BafoStatus bafo_efficient_allocation(const struct BafoInstance *inst, uint32_t *out_mask);

/**
 * Plays the auction with canonical strategies and returns the transcript.
 *
 * `price_bound` is the bid cap (Name-Your-BAFO) or starting price
 * (descending); pass 0 for the default. `order`/`order_len` give the
 * approach order or descending priority; pass `order_len = 0` for the
 * default.
 *
 * # Safety
 * Pointers must be valid; `order` must hold `order_len` entries.
 */
enum BafoStatus bafo_run_canonical(const struct BafoInstance *inst,
                                   enum BafoFormat format,
                                   int64_t price_bound,
                                   const size_t *order,
                                   size_t order_len,
                                   char **out_json);

/**
 * Computes the exact equilibrium and returns the solve report.
 * `budget = 0` uses the default work budget.
 *
 * # Safety
 * As for [`bafo_run_canonical`].
 */
enum BafoStatus bafo_solve(const struct BafoInstance *inst,
                           enum BafoFormat format,
                           int64_t price_bound,
                           const size_t *order,
                           size_t order_len,
                           uint64_t budget,
                           char **out_json);

/**
 * Runs a preset experiment (`n = 0` for its default size). The report's
 * `pass` field says whether every check held.
 *
 * # Safety
 * `name` must be NUL-terminated and `out_json` valid.
 */
enum BafoStatus bafo_experiment(const char *name, size_t n, char **out_json);

/**
 * Message for the last failed call on this thread ("" if none). Valid
 * until the next call into this library from the same thread.
 */
const char *bafo_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void bafo_string_free(char *s);

const char *bafo_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAFO_H */
