#ifndef FOLDQUANT_H
#define FOLDQUANT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum FqStatus {
  FQ_STATUS_OK = 0,
  FQ_STATUS_NULL_POINTER = 1,
  FQ_STATUS_DOMAIN = 2,
  FQ_STATUS_TRUNCATION = 3,
  FQ_STATUS_QUADRATURE = 4,
  FQ_STATUS_UNFOLDING = 5,
  FQ_STATUS_ZERO_ENERGY = 6,
  FQ_STATUS_CONFIG = 7,
  FQ_STATUS_IO = 8,
  FQ_STATUS_PANIC = 9,
} FqStatus;

/**
 * A base probability law.
 */
typedef struct FqDistribution FqDistribution;

/**
 * The law of a folded variable.
 */
typedef struct FqFolded FqFolded;

/**
 * A scalar quantizer.
 */
typedef struct FqQuantizer FqQuantizer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fq_version(void);

/**
 * Copies the last error message of this thread into `buf`, truncating and
 * NUL-terminating as needed. Returns the full message length without the
 * terminator, or 0 if there is no error.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t fq_last_error(char *buf, size_t cap);

/**
 * Folds `x` with gain `gain` into `[-half_range, half_range)`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum FqStatus fq_fold(double x, double gain, double half_range, double *out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum FqStatus fq_distribution_normal(double mean, double std_dev, struct FqDistribution **out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum FqStatus fq_distribution_uniform(double lo, double hi, struct FqDistribution **out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum FqStatus fq_distribution_exponential(double rate, struct FqDistribution **out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum FqStatus fq_distribution_lognormal(double mu, double sigma, struct FqDistribution **out);

/**
 * # Safety
 * `d` must be null or a handle from an `fq_distribution_*` constructor not yet freed.
 */
void fq_distribution_free(struct FqDistribution *d);

/**
 * # Safety
 * `d` must be a live distribution handle and `out` a valid pointer.
 */
enum FqStatus fq_distribution_cdf(const struct FqDistribution *d, double x, double *out);

/**
 * # Safety
 * `d` must be a live distribution handle and `out` a valid pointer.
 */
enum FqStatus fq_distribution_quantile(const struct FqDistribution *d, double u, double *out);

/**
 * Builds the folded law of `gain * X` wrapped into `[-half_range, half_range)`.
 * `tol` bounds the truncated series tail; pass 0 for the default.
 *
 * # Safety
 * `base` must be a live distribution handle and `out` a valid handle slot.
 */
enum FqStatus fq_folded_new(const struct FqDistribution *base,
                            double gain,
                            double half_range,
                            double tol,
                            struct FqFolded **out);

/**
 * # Safety
 * `f` must be null or a handle from [`fq_folded_new`] not yet freed.
 */
void fq_folded_free(struct FqFolded *f);

/**
 * # Safety
 * `f` must be a live folded handle and `out` a valid pointer.
 */
enum FqStatus fq_folded_cdf(const struct FqFolded *f, double theta, double *out);

/**
 * # Safety
 * `f` must be a live folded handle and `out` a valid pointer.
 */
enum FqStatus fq_folded_pdf(const struct FqFolded *f, double theta, double *out);

/**
 * Uniform mid-rise quantizer with `levels` cells on `[lo, hi]`.
 *
 * # Safety
 * `out` must be a valid handle slot.
 */
enum FqStatus fq_quantizer_uniform(size_t levels, double lo, double hi, struct FqQuantizer **out);

/**
 * Lloyd-Max quantizer for `d` with `levels` cells on `[lo, hi]`.
 * `converged` may be null.
 *
 * # Safety
 * `d` must be a live distribution handle, `out` a valid handle slot and
 * `converged` null or a valid pointer.
 */
enum FqStatus fq_quantizer_lloyd_max(const struct FqDistribution *d,
                                     size_t levels,
                                     double lo,
                                     double hi,
                                     bool *converged,
                                     struct FqQuantizer **out);

/**
 * # Safety
 * `q` must be null or a quantizer handle not yet freed.
 */
void fq_quantizer_free(struct FqQuantizer *q);

/**
 * Number of cells, or 0 for a null handle.
 *
 * # Safety
 * `q` must be null or a live quantizer handle.
 */
size_t fq_quantizer_len(const struct FqQuantizer *q);

/**
 * Copies the reproduction levels into `levels` (`cap` entries).
 *
 * # Safety
 * `q` must be a live quantizer handle and `levels` point to `cap` doubles.
 */
enum FqStatus fq_quantizer_levels(const struct FqQuantizer *q, double *levels, size_t cap);

/**
 * Quantizes `len` values from `input` into `output`. The buffers may alias.
 *
 * # Safety
 * `q` must be a live quantizer handle and both buffers hold `len` doubles.
 */
enum FqStatus fq_quantize(const struct FqQuantizer *q,
                          const double *input,
                          double *output,
                          size_t len);

/**
 * Normalized squared error of quantizing `signal`.
 *
 * # Safety
 * `q` must be a live quantizer handle, `signal` hold `len` doubles and `out`
 * be a valid pointer.
 */
enum FqStatus fq_nmse(const struct FqQuantizer *q, const double *signal, size_t len, double *out);

/**
 * Order-`r` Wasserstein distance between two laws.
 *
 * # Safety
 * `x` and `y` must be live distribution handles and `out` a valid pointer.
 */
enum FqStatus fq_wasserstein(const struct FqDistribution *x,
                             const struct FqDistribution *y,
                             uint32_t r,
                             double *out);

/**
 * W1 distance between the folded law of `base` and the uniform law.
 *
 * # Safety
 * `base` must be a live distribution handle and `out` a valid pointer.
 */
enum FqStatus fq_w1_folded_to_uniform(const struct FqDistribution *base,
                                      double gain,
                                      double half_range,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOLDQUANT_H */
