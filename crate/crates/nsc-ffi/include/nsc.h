#ifndef NSC_H
#define NSC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  NscStatusOk = 0,
  /**
   * A required pointer argument was NULL.
   */
  NscStatusNullArgument = 1,
  /**
   * An argument was out of range or otherwise invalid.
   */
  NscStatusInvalidArgument = 2,
  /**
   * The record is too short for the requested operation.
   */
  NscStatusInsufficientData = 3,
  /**
   * The independent variable carries no information (zero variance).
   */
  NscStatusDegenerate = 4,
  /**
   * No curve window satisfied the extraction rules.
   */
  NscStatusExtractionFailed = 5,
  /**
   * Every mismatch candidate was degenerate.
   */
  NscStatusCompensationFailed = 6,
  /**
   * An internal invariant failed; see the last error message.
   */
  NscStatusInternal = 7,
} NscStatus;

/**
 * Noise kinds accepted by the generator and the curve functions.
 * `NscNoiseAuto` asks the curve functions to classify the record.
 */
typedef enum {
  NscNoiseAuto = -1,
  NscNoiseWhite = 0,
  NscNoiseFlicker = 1,
  NscNoiseRandomWalk = 2,
} NscNoise;

/**
 * Opaque sensitivity curve.
 */
typedef struct NscCurve NscCurve;

/**
 * Opaque uniformly sampled record.
 */
typedef struct NscSeries NscSeries;

/**
 * One curve point, by value.
 */
typedef struct {
  size_t m;
  double tau;
  double k;
  double sigma_k;
  double edf;
} NscCurvePoint;

/**
 * Scalar estimate with decomposed uncertainty.
 */
typedef struct {
  double k_bar;
  double sigma_bar;
  double sigma_max;
  double sigma_total;
  size_t m_lo;
  size_t m_hi;
} NscEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Thread-local description of the most recent failure. Never NULL;
 * empty before the first failure. Valid until the next failing call on
 * the same thread.
 */
const char *nsc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nsc_version(void);

/**
 * Copies `len` samples at base period `tau0` (seconds) into a new record.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be a valid
 * pointer to receive the handle.
 */
NscStatus nsc_series_new(const double *values, size_t len, double tau0, NscSeries **out);

/**
 * Generates a seeded noise record (see [`NscNoise`]; `NscNoiseAuto` is
 * not a generator kind). `level` is the two-sample deviation at `tau0`.
 *
 * # Safety
 * `out` must be a valid pointer to receive the handle.
 */
NscStatus nsc_noise_generate(NscNoise kind,
                             double level,
                             uint64_t seed,
                             size_t n,
                             double tau0,
                             NscSeries **out);

/**
 * Frees a record handle; NULL is ignored.
 *
 * # Safety
 * `series` must have come from this library and not be freed twice.
 */
void nsc_series_free(NscSeries *series);

/**
 * Number of samples in a record; 0 for NULL.
 *
 * # Safety
 * `series` must be a live handle from this library or NULL.
 */
size_t nsc_series_len(const NscSeries *series);

/**
 * Borrowed pointer to the record's samples ([`nsc_series_len`] doubles),
 * valid until the handle is freed; NULL for NULL input.
 *
 * # Safety
 * `series` must be a live handle from this library or NULL.
 */
const double *nsc_series_data(const NscSeries *series);

/**
 * Two-sample (Allan) variance at averaging factor `m`; `overlap`
 * non-zero selects the overlapping estimator.
 *
 * # Safety
 * `series` must be a live handle; `out` a valid pointer.
 */
NscStatus nsc_adev2(const NscSeries *series, size_t m, int32_t overlap, double *out);

/**
 * Two-sample covariance of two records at averaging factor `m`.
 *
 * # Safety
 * Both handles must be live; `out` a valid pointer.
 */
NscStatus nsc_acov(const NscSeries *a, const NscSeries *b, size_t m, int32_t overlap, double *out);

/**
 * Sensitivity coefficient of `y` against `x` at averaging factor `m`:
 * the ratio of their two-sample covariance to the variance of `x`.
 *
 * # Safety
 * Both handles must be live; `out` a valid pointer.
 */
NscStatus nsc_k_of_tau(const NscSeries *y,
                       const NscSeries *x,
                       size_t m,
                       int32_t overlap,
                       double *out);

/**
 * Computes a sensitivity curve over the default tau grid.
 * `difference_variant` non-zero replaces both records by adjacent
 * differences first; `noise` feeds the confidence model.
 *
 * # Safety
 * Both handles must be live; `out` a valid pointer to receive the curve.
 */
NscStatus nsc_k_curve(const NscSeries *y,
                      const NscSeries *x,
                      int32_t overlap,
                      int32_t difference_variant,
                      NscNoise noise,
                      NscCurve **out);

/**
 * Frees a curve handle; NULL is ignored.
 *
 * # Safety
 * `curve` must have come from this library and not be freed twice.
 */
void nsc_curve_free(NscCurve *curve);

/**
 * Number of points in a curve; 0 for NULL.
 *
 * # Safety
 * `curve` must be a live handle from this library or NULL.
 */
size_t nsc_curve_len(const NscCurve *curve);

/**
 * Copies point `index` of a curve.
 *
 * # Safety
 * `curve` must be a live handle; `out` a valid pointer.
 */
NscStatus nsc_curve_point(const NscCurve *curve, size_t index, NscCurvePoint *out);

/**
 * Condenses a curve to a scalar estimate with decomposed uncertainty.
 *
 * # Safety
 * `curve` must be a live handle; `out` a valid pointer.
 */
NscStatus nsc_extract_estimate(const NscCurve *curve, NscEstimate *out);

/**
 * Searches delays in `[-dmax, dmax]` and integral windows in
 * `[1, imax]` for the timing mismatch best aligning `x` with `y`;
 * writes the winning pair and, when `curve_out` is non-NULL, the
 * compensated curve.
 *
 * # Safety
 * `y` and `x` must be live handles; `best_d` and `best_i` valid
 * pointers; `curve_out` NULL or valid.
 */
NscStatus nsc_compensate(const NscSeries *y,
                         const NscSeries *x,
                         int64_t dmax,
                         size_t imax,
                         int64_t *best_d,
                         size_t *best_i,
                         NscCurve **curve_out);

/**
 * Root-sum-square uncertainty synthesis: `sqrt(sum (k_i sigma_i)^2)`
 * over `len` entries.
 *
 * # Safety
 * `k` and `sigma_x` must point to `len` readable doubles; `out` must be
 * valid.
 */
NscStatus nsc_budget_rss(const double *k, const double *sigma_x, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSC_H */
