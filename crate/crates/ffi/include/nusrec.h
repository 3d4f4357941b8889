#ifndef NUSREC_H
#define NUSREC_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum NusrecStatus {
  NUSREC_STATUS_OK = 0,
  NUSREC_STATUS_NULL_POINTER = 1,
  NUSREC_STATUS_INVALID_ARGUMENT = 2,
  NUSREC_STATUS_DIMENSION_MISMATCH = 3,
  NUSREC_STATUS_PANIC = 4,
} NusrecStatus;

// Sampling kernel families.
typedef enum NusrecKernel {
  // Integral over each inter-sample interval.
  NUSREC_KERNEL_INDICATOR = 0,
  // Leaky integral; uses the `alpha` argument.
  NUSREC_KERNEL_LEAKY_EXP = 1,
  // Differences of point values.
  NUSREC_KERNEL_RAMP = 2,
  // Point values of a bandlimited signal.
  NUSREC_KERNEL_SINC = 3,
} NusrecKernel;

// Opaque sampling operator.
typedef struct NusrecOperator NusrecOperator;

// Opaque bandlimited periodic signal.
typedef struct NusrecSignal NusrecSignal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on this thread.
const char *nusrec_last_error_message(void);

// Random real signal of the given period, rescaled to `rms`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum NusrecStatus nusrec_signal_random(double period,
                                       double rms,
                                       uint64_t seed,
                                       struct NusrecSignal **out);

// Signal from Fourier coefficients `c_0 .. c_{n-1}` given as real and imaginary parts.
//
// # Safety
// `re` and `im` must point to `n` readable doubles; `out` to one writable handle.
enum NusrecStatus nusrec_signal_from_coeffs(double period,
                                            const double *re,
                                            const double *im,
                                            size_t n,
                                            struct NusrecSignal **out);

// Writes `x(t)` to `value`.
//
// # Safety
// `signal` must be a live handle and `value` writable.
enum NusrecStatus nusrec_signal_eval(const struct NusrecSignal *signal, double t, double *value);

// Number of stored coefficients `c_0 .. c_M`.
//
// # Safety
// `signal` must be a live handle and `len` writable.
enum NusrecStatus nusrec_signal_num_coeffs(const struct NusrecSignal *signal, size_t *len);

// Copies the coefficients into `re` and `im`, which must hold exactly `len` entries.
//
// # Safety
// `signal` must be a live handle; `re` and `im` must point to `len` writable doubles.
enum NusrecStatus nusrec_signal_coeffs(const struct NusrecSignal *signal,
                                       double *re,
                                       double *im,
                                       size_t len);

// Releases a signal; null is ignored.
//
// # Safety
// `signal` must come from this library and not be used afterwards.
void nusrec_signal_free(struct NusrecSignal *signal);

// Sampling operator of a kernel family on increasing instants in one period.
//
// # Safety
// `instants` must point to `n` readable doubles and `out` to one writable handle.
enum NusrecStatus nusrec_operator_new(enum NusrecKernel kernel,
                                      double alpha,
                                      const double *instants,
                                      size_t n,
                                      double period,
                                      struct NusrecOperator **out);

// Releases an operator; null is ignored.
//
// # Safety
// `op` must come from this library and not be used afterwards.
void nusrec_operator_free(struct NusrecOperator *op);

// # Safety
// `op` must be a live handle and `n` writable.
enum NusrecStatus nusrec_operator_num_samples(const struct NusrecOperator *op, size_t *n);

// Generalized samples of `signal` (projected onto the operator's space first).
//
// # Safety
// Handles must be live; `values` must point to `len` writable doubles.
enum NusrecStatus nusrec_operator_apply(const struct NusrecOperator *op,
                                        const struct NusrecSignal *signal,
                                        double *values,
                                        size_t len);

// Reduced minimum modulus, operator norm and numerical rank.
//
// # Safety
// `op` must be live; the three outputs must be writable.
enum NusrecStatus nusrec_operator_spectral_bounds(const struct NusrecOperator *op,
                                                  double *gamma,
                                                  double *norm,
                                                  size_t *rank);

// Minimum-norm least-squares estimate from `len` samples.
//
// # Safety
// `op` must be live, `values` readable for `len` doubles, `out` writable.
enum NusrecStatus nusrec_pseudo_inverse(const struct NusrecOperator *op,
                                        const double *values,
                                        size_t len,
                                        struct NusrecSignal **out);

// Relaxed POCS from `u0` (zero when null). Writes the estimate and the number
// of iterations performed; `converged` is set to 1 when the stop rule fired.
//
// # Safety
// Handles must be live or null where allowed; `values` readable for `len`
// doubles; `out` writable; `iterations` and `converged` writable or null.
enum NusrecStatus nusrec_pocs_run(const struct NusrecOperator *op,
                                  const double *values,
                                  size_t len,
                                  const struct NusrecSignal *u0,
                                  double lambda,
                                  size_t max_iters,
                                  double tol,
                                  struct NusrecSignal **out,
                                  size_t *iterations,
                                  int32_t *converged);

const char *nusrec_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NUSREC_H */
