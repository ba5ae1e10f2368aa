#ifndef CONDCOV_H
#define CONDCOV_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_ARGUMENT = 2,
  CC_STATUS_DIMENSION_MISMATCH = 3,
  CC_STATUS_NUMERICAL_FAILURE = 4,
  CC_STATUS_PANIC = 5,
} CcStatus;

/**
 * Opaque training or calibration sample.
 */
typedef struct CcDataset CcDataset;

/**
 * Opaque prediction set: a sorted union of disjoint closed intervals.
 */
typedef struct CcPredictionSet CcPredictionSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cc_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated and
 * NUL-terminated). Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t cc_last_error_message(char *buf, size_t len);

/**
 * Builds a dataset from `n` row-major feature rows of width `dim` and `n`
 * labels. Both arrays are copied.
 *
 * # Safety
 * `xs` must hold `n * dim` values, `ys` must hold `n`, `out` must be writable.
 */
enum CcStatus cc_dataset_new(const double *xs,
                             const double *ys,
                             size_t n,
                             size_t dim,
                             struct CcDataset **out);

/**
 * # Safety
 * `data` must be null or a handle from [`cc_dataset_new`] not yet freed.
 */
void cc_dataset_free(struct CcDataset *data);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `data` must be null or a live handle.
 */
size_t cc_dataset_len(const struct CcDataset *data);

/**
 * Feature dimension, or 0 for a null handle.
 *
 * # Safety
 * `data` must be null or a live handle.
 */
size_t cc_dataset_dim(const struct CcDataset *data);

/**
 * # Safety
 * `set` must be null or a handle returned by this library not yet freed.
 */
void cc_set_free(struct CcPredictionSet *set);

/**
 * Number of disjoint intervals (0 for the empty set or a null handle).
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t cc_set_num_intervals(const struct CcPredictionSet *set);

/**
 * Endpoints of interval `index`; unbounded ends are reported as infinities.
 *
 * # Safety
 * `set` must be a live handle, `lo` and `hi` writable.
 */
enum CcStatus cc_set_interval(const struct CcPredictionSet *set,
                              size_t index,
                              double *lo,
                              double *hi);

/**
 * 1 if `y` lies in the set, 0 otherwise (including a null handle).
 *
 * # Safety
 * `set` must be null or a live handle.
 */
int32_t cc_set_contains(const struct CcPredictionSet *set, double y);

/**
 * Lebesgue measure of the set (infinite for unbounded sets).
 *
 * # Safety
 * `set` must be null or a live handle.
 */
double cc_set_measure(const struct CcPredictionSet *set);

/**
 * Split conformal with ridge: fit on `train`, calibrate on `calibration`.
 *
 * # Safety
 * Handles must be live, `x` must hold `dim` values, `out` writable.
 */
enum CcStatus cc_split_ridge(const struct CcDataset *train,
                             const struct CcDataset *calibration,
                             double lambda,
                             const double *x,
                             size_t dim,
                             double alpha,
                             struct CcPredictionSet **out);

/**
 * Exact full conformal set for ridge at `x`.
 *
 * # Safety
 * As for [`cc_split_ridge`].
 */
enum CcStatus cc_full_ridge(const struct CcDataset *train,
                            double lambda,
                            const double *x,
                            size_t dim,
                            double alpha,
                            struct CcPredictionSet **out);

/**
 * Jackknife+ interval for ridge at `x`.
 *
 * # Safety
 * As for [`cc_split_ridge`].
 */
enum CcStatus cc_jackknife_plus_ridge(const struct CcDataset *train,
                                      double lambda,
                                      const double *x,
                                      size_t dim,
                                      double alpha,
                                      struct CcPredictionSet **out);

/**
 * CV+ interval for ridge at `x` with `folds` equal folds drawn from `seed`.
 *
 * # Safety
 * As for [`cc_split_ridge`].
 */
enum CcStatus cc_cv_plus_ridge(const struct CcDataset *train,
                               double lambda,
                               const double *x,
                               size_t dim,
                               double alpha,
                               size_t folds,
                               uint64_t seed,
                               struct CcPredictionSet **out);

/**
 * Miscoverage level that split conformal exceeds with probability at most
 * `delta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CcStatus cc_split_pac_bound(double alpha, double delta, size_t n1, double *out);

/**
 * CV+ training-conditional bound for `folds` folds of size `fold_size`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CcStatus cc_cvplus_pac_bound(double alpha,
                                  double delta,
                                  size_t folds,
                                  size_t fold_size,
                                  double *out);

/**
 * Lower bound on the worst-case training-conditional miscoverage.
 *
 * # Safety
 * `out` must be writable.
 */
enum CcStatus cc_adversarial_floor(double alpha, size_t n, double *out);

/**
 * Level to run split conformal at for a PAC guarantee at `alpha`.
 * `feasible` is set to 0 when no level exists; `value` then holds the
 * correction that was too large.
 *
 * # Safety
 * `value` and `feasible` must be writable.
 */
enum CcStatus cc_corrected_alpha_split(double alpha,
                                       double delta,
                                       size_t n1,
                                       double *value,
                                       int32_t *feasible);

/**
 * Width of the modular window used by the clock adversary.
 *
 * # Safety
 * `out` must be writable.
 */
enum CcStatus cc_compute_m1(size_t n, size_t cells, double alpha, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONDCOV_H */
