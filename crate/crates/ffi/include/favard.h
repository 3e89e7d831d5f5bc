#ifndef FAVARD_H
#define FAVARD_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Largest scale exponent accepted when deriving schedules.
 */
#define FAVARD_SCALE_BUDGET 60

typedef enum FavardGrowth {
  FAVARD_GROWTH_LINEAR = 0,
  FAVARD_GROWTH_SQRT = 1,
  FAVARD_GROWTH_LOG = 2,
} FavardGrowth;

typedef enum FavardStatus {
  FAVARD_STATUS_OK = 0,
  FAVARD_STATUS_NULL_POINTER = 1,
  FAVARD_STATUS_CONFIG = 2,
  FAVARD_STATUS_BUDGET = 3,
  FAVARD_STATUS_INVALID_ARGUMENT = 4,
  FAVARD_STATUS_ARITHMETIC = 5,
  FAVARD_STATUS_IO = 6,
  FAVARD_STATUS_PANIC = 7,
} FavardStatus;

typedef struct FavardBoxFamily FavardBoxFamily;

typedef struct FavardSchedule FavardSchedule;

typedef struct FavardSegmentFamily FavardSegmentFamily;

typedef struct FavardEstimateC {
  double value;
  double error_bound;
  double eps;
  size_t nodes;
} FavardEstimateC;

typedef struct FavardPairSum {
  double sum_unordered;
  double sum_ordered;
  double lower_bound;
  double analytic;
  /**
   * Nonzero when every pair was scanned.
   */
  int32_t exhaustive;
} FavardPairSum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The caller
 * owns the string and releases it with [`favard_string_free`].
 */
char *favard_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *favard_version(void);

/**
 * # Safety
 * `s` is null or a string returned by this library, not yet freed.
 */
void favard_string_free(char *s);

/**
 * Schedule for a growth preset with `levels` levels.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FavardStatus favard_schedule_from_preset(enum FavardGrowth growth,
                                              size_t levels,
                                              uint64_t c_sep,
                                              struct FavardSchedule **out);

/**
 * Schedule for explicit growth values `g(1), ..., g(len)`.
 *
 * # Safety
 * `values` must point to `len` doubles and `out` must be valid for writes.
 */
enum FavardStatus favard_schedule_from_growth(const double *values,
                                              size_t len,
                                              uint64_t c_sep,
                                              struct FavardSchedule **out);

/**
 * # Safety
 * `s` is null or a live schedule handle.
 */
void favard_schedule_free(struct FavardSchedule *s);

/**
 * # Safety
 * `s` must be a live schedule handle and `out` valid for writes.
 */
enum FavardStatus favard_schedule_levels(const struct FavardSchedule *s, size_t *out);

/**
 * Scale exponent `m_k`.
 *
 * # Safety
 * `s` must be a live schedule handle and `out` valid for writes.
 */
enum FavardStatus favard_schedule_scale(const struct FavardSchedule *s, size_t k, uint32_t *out);

/**
 * Increment `a_k` rounded to binary64.
 *
 * # Safety
 * `s` must be a live schedule handle and `out` valid for writes.
 */
enum FavardStatus favard_schedule_increment(const struct FavardSchedule *s, size_t k, double *out);

/**
 * Segment family `F_n`.
 *
 * # Safety
 * `s` must be a live schedule handle and `out` valid for writes.
 */
enum FavardStatus favard_segment_family_build(const struct FavardSchedule *s,
                                              size_t n,
                                              uint64_t max_segments,
                                              struct FavardSegmentFamily **out);

/**
 * # Safety
 * `f` is null or a live segment family handle.
 */
void favard_segment_family_free(struct FavardSegmentFamily *f);

/**
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_segment_family_len(const struct FavardSegmentFamily *f, size_t *out);

/**
 * Box family `E_n`.
 *
 * # Safety
 * `s` must be a live schedule handle and `out` valid for writes.
 */
enum FavardStatus favard_box_family_build(const struct FavardSchedule *s,
                                          size_t n,
                                          uint64_t max_boxes,
                                          struct FavardBoxFamily **out);

/**
 * Level `n` of the four-corner set.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FavardStatus favard_four_corner_build(size_t n,
                                           uint64_t max_boxes,
                                           struct FavardBoxFamily **out);

/**
 * Level `n` of the random four-corner set for `seed`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FavardStatus favard_random_four_corner_build(size_t n,
                                                  uint64_t seed,
                                                  uint64_t max_boxes,
                                                  struct FavardBoxFamily **out);

/**
 * # Safety
 * `f` is null or a live box family handle.
 */
void favard_box_family_free(struct FavardBoxFamily *f);

/**
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_box_family_len(const struct FavardBoxFamily *f, size_t *out);

/**
 * Family JSON, released with [`favard_string_free`].
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_segment_family_to_json(const struct FavardSegmentFamily *f, char **out);

/**
 * Family JSON, released with [`favard_string_free`].
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_box_family_to_json(const struct FavardBoxFamily *f, char **out);

/**
 * Parses family JSON into either handle; the other output is set to null.
 *
 * # Safety
 * `json` must be a nul-terminated string; both outputs valid for writes.
 */
enum FavardStatus favard_family_from_json(const char *json,
                                          struct FavardSegmentFamily **segments,
                                          struct FavardBoxFamily **boxes);

/**
 * `|p_θ(N(F, eps))|`.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_segment_family_projection(const struct FavardSegmentFamily *f,
                                                   double theta,
                                                   double eps,
                                                   double *out);

/**
 * `|p_θ(N(E, eps))|`.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_box_family_projection(const struct FavardBoxFamily *f,
                                               double theta,
                                               double eps,
                                               double *out);

/**
 * Favard length of `N(F, eps)` by angle quadrature.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_segment_family_estimate(const struct FavardSegmentFamily *f,
                                                 double eps,
                                                 size_t nodes,
                                                 struct FavardEstimateC *out);

/**
 * Favard length of `N(E, eps)` by angle quadrature. Four-corner families
 * are projected hierarchically.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_box_family_estimate(const struct FavardBoxFamily *f,
                                             double eps,
                                             size_t nodes,
                                             struct FavardEstimateC *out);

/**
 * Favard length of `N(F_n, eps)` without enumerating segments.
 *
 * # Safety
 * `s` must be a live schedule handle and `out` valid for writes.
 */
enum FavardStatus favard_graph_estimate(const struct FavardSchedule *s,
                                        size_t n,
                                        double eps,
                                        size_t nodes,
                                        struct FavardEstimateC *out);

/**
 * Area of the dual set of `F_n` in the strip, and the matching angle
 * integral over the charted directions.
 *
 * # Safety
 * `s` must be a live schedule handle; both outputs valid for writes.
 */
enum FavardStatus favard_dual_area(const struct FavardSchedule *s,
                                   size_t n,
                                   size_t nodes,
                                   double *area,
                                   double *restricted);

/**
 * Pair sum of the dual wedges and its reciprocal lower bound.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum FavardStatus favard_pair_sum(const struct FavardSegmentFamily *f,
                                  uint64_t c_reach,
                                  size_t nodes,
                                  struct FavardPairSum *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAVARD_H */
