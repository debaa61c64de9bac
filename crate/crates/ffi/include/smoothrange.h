#ifndef SMOOTHRANGE_H
#define SMOOTHRANGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SR_PROFILE_BALL 0

#define SR_PROFILE_TRIANGLE 1

#define SR_PROFILE_EPANECHNIKOV 2

#define SR_PROFILE_GAUSSIAN 3

#define SR_MATCHING_EXACT 0

#define SR_MATCHING_GREEDY 1

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_ARGUMENT = 2,
  SR_STATUS_DIMENSION_MISMATCH = 3,
  SR_STATUS_EMPTY_INPUT = 4,
  SR_STATUS_CAP_EXCEEDED = 5,
  SR_STATUS_UNSUPPORTED = 6,
  SR_STATUS_IO = 7,
  SR_STATUS_PANIC = 8,
} SrStatus;

/**
 * Opaque point set handle.
 */
typedef struct SrPointSet SrPointSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a point set from `n * dim` row-major coordinates and optional
 * per-point weights (`weights` may be null).
 *
 * # Safety
 * `coords` must hold `n * dim` doubles, `weights` null or `n` doubles, and
 * `out` must be writable.
 */
enum SrStatus sr_pointset_new(size_t dim,
                              const double *coords,
                              size_t n,
                              const double *weights,
                              struct SrPointSet **out);

/**
 * # Safety
 * `points` must be null or a handle not yet freed.
 */
void sr_pointset_free(struct SrPointSet *points);

/**
 * Number of points; 0 for a null handle.
 *
 * # Safety
 * `points` must be null or a live handle.
 */
size_t sr_pointset_len(const struct SrPointSet *points);

/**
 * Dimension; 0 for a null handle.
 *
 * # Safety
 * `points` must be null or a live handle.
 */
size_t sr_pointset_dim(const struct SrPointSet *points);

/**
 * Copies the row-major coordinates into `out`, which holds `capacity` doubles.
 *
 * # Safety
 * `points` must be a live handle and `out` valid for `capacity` writes.
 */
enum SrStatus sr_pointset_coords(const struct SrPointSet *points, double *out, size_t capacity);

/**
 * Smoothed density of the halfspace `{x : normal . x >= offset}` with
 * width `w`. `normal` holds `dim` doubles and must have unit length.
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
enum SrStatus sr_sde_halfspace(const struct SrPointSet *points,
                               const double *normal,
                               double offset,
                               double w,
                               uint32_t profile_code,
                               double *out);

/**
 * Kernel density of `points` at `x` (`dim` doubles).
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
enum SrStatus sr_kde(const struct SrPointSet *points,
                     const double *x,
                     double w,
                     uint32_t profile_code,
                     double *out);

/**
 * MergeReduce to `target_size` points. `matching` is `SR_MATCHING_EXACT` or
 * `SR_MATCHING_GREEDY`. The result is a new handle owned by the caller.
 *
 * # Safety
 * `points` must be a live handle and `out` writable.
 */
enum SrStatus sr_merge_reduce(const struct SrPointSet *points,
                              size_t target_size,
                              double w,
                              uint32_t matching,
                              uint64_t seed,
                              struct SrPointSet **out);

/**
 * Largest `|sde_P(h) - sde_Q(h)|` over the smoothed halfspaces of `n_dirs`
 * directions at the critical offsets of `p`.
 *
 * # Safety
 * `p`, `q` must be live handles and `out` writable.
 */
enum SrStatus sr_eps_sample_error(const struct SrPointSet *p,
                                  const struct SrPointSet *q,
                                  double w,
                                  uint32_t profile_code,
                                  size_t n_dirs,
                                  double *out);

/**
 * Cluster complexity from farthest-point clustering with up to `k_max`
 * centers (0 selects `ceil(log2 n)`).
 *
 * # Safety
 * `points` must be a live handle and `out` writable.
 */
enum SrStatus sr_cluster_phi(const struct SrPointSet *points, size_t k_max, double *out);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *sr_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sr_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SMOOTHRANGE_H */
