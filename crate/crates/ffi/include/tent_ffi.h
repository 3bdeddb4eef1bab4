#ifndef TENT_FFI_H
#define TENT_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TentRegime {
  TENT_REGIME_POSITIVE = 0,
  TENT_REGIME_NEGATIVE = 1,
} TentRegime;

typedef enum TentStatus {
  TENT_STATUS_OK = 0,
  TENT_STATUS_NULL_POINTER = 1,
  TENT_STATUS_INVALID_UTF8 = 2,
  TENT_STATUS_INVALID_ARGUMENT = 3,
  TENT_STATUS_OUT_OF_RANGE = 4,
  TENT_STATUS_PARSE_ERROR = 5,
  TENT_STATUS_INDEX_OUT_OF_BOUNDS = 6,
  TENT_STATUS_PANIC = 7,
} TentStatus;

/**
 * Exact cycles from [`tent_enumerate`].
 */
typedef struct TentCycleSet TentCycleSet;

/**
 * Distinct numeric cycles from [`tent_find`].
 */
typedef struct TentFoundSet TentFoundSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. Valid until the next failure.
 */
const char *tent_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *tent_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void tent_string_free(char *s);

/**
 * Number of proper `period`-cycles, `1 <= period <= 64`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TentStatus tent_count_cycles(uint32_t period, uint64_t *out);

/**
 * Endpoints of the stabilizing interval of `theta` for slope `h` (rational text).
 *
 * # Safety
 * `h` must be a NUL-terminated string; `lo` and `hi` must be valid for writes.
 */
enum TentStatus tent_theta_interval(const char *h,
                                    uint32_t period,
                                    enum TentRegime regime,
                                    char **lo,
                                    char **hi);

/**
 * `theta = (H^T + c/H) / (H^T -+ 1)` for an offset `|c| < 1`.
 *
 * # Safety
 * `h` and `offset` must be NUL-terminated strings; `out` must be valid for writes.
 */
enum TentStatus tent_theta_from_offset(const char *h,
                                       uint32_t period,
                                       enum TentRegime regime,
                                       const char *offset,
                                       char **out);

/**
 * Exact multiplier `mu (theta + (1 - theta) mu)^T` of the controlled cycle.
 *
 * # Safety
 * `mu` and `theta` must be NUL-terminated strings; `out` must be valid for writes.
 */
enum TentStatus tent_controlled_multiplier(const char *mu,
                                           const char *theta,
                                           uint32_t period,
                                           char **out);

/**
 * Whether a `tau`-cycle with multiplier sign `sign` (+1 or -1) is stabilized by period-`period` control.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TentStatus tent_subcycle_stable(uint32_t period,
                                     uint32_t tau,
                                     enum TentRegime regime,
                                     int8_t sign,
                                     bool *out);

/**
 * All proper `period`-cycles of slope `h`, sorted by smallest point.
 *
 * # Safety
 * `h` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum TentStatus tent_enumerate(const char *h, uint32_t period, struct TentCycleSet **out);

/**
 * # Safety
 * `set` must be a live handle or null.
 */
size_t tent_cycle_set_len(const struct TentCycleSet *set);

/**
 * Period and multiplier sign of cycle `i`.
 *
 * # Safety
 * `set` must be a live handle; `period` and `sign` must be valid for writes.
 */
enum TentStatus tent_cycle_set_info(const struct TentCycleSet *set,
                                    size_t i,
                                    uint32_t *period,
                                    int8_t *sign);

/**
 * Point `j` of cycle `i` as exact rational text.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for writes.
 */
enum TentStatus tent_cycle_set_point(const struct TentCycleSet *set,
                                     size_t i,
                                     size_t j,
                                     char **out);

/**
 * Branch word (`L`/`R`) of cycle `i`, aligned with its points.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for writes.
 */
enum TentStatus tent_cycle_set_symbols(const struct TentCycleSet *set, size_t i, char **out);

/**
 * # Safety
 * `set` must come from [`tent_enumerate`] and not be freed twice. Null is ignored.
 */
void tent_cycle_set_free(struct TentCycleSet *set);

/**
 * Grid search from seeds `k / (grid + 1)` with `theta` given by `offset`.
 * `precision = 0` selects the default rule.
 *
 * # Safety
 * `h` and `offset` must be NUL-terminated strings; `out` must be valid for writes.
 */
enum TentStatus tent_find(const char *h,
                          uint32_t period,
                          enum TentRegime regime,
                          const char *offset,
                          size_t grid,
                          uint32_t precision,
                          struct TentFoundSet **out);

/**
 * # Safety
 * `set` must be a live handle or null.
 */
size_t tent_found_set_len(const struct TentFoundSet *set);

/**
 * Proper period of found cycle `i`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for writes.
 */
enum TentStatus tent_found_set_tau(const struct TentFoundSet *set, size_t i, uint32_t *out);

/**
 * Point `j` of found cycle `i` as decimal text.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for writes.
 */
enum TentStatus tent_found_set_point(const struct TentFoundSet *set,
                                     size_t i,
                                     size_t j,
                                     char **out);

/**
 * Found cycle `i` as the JSON line `tentctl find` prints.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for writes.
 */
enum TentStatus tent_found_set_json(const struct TentFoundSet *set, size_t i, char **out);

/**
 * # Safety
 * `set` must come from [`tent_find`] and not be freed twice. Null is ignored.
 */
void tent_found_set_free(struct TentFoundSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TENT_FFI_H */
