/* riskcert C API.
 *
 * Distribution-free, finite-sample risk certificates: order-statistic
 * quantile bounds, empirical-CDF band bounds for means and CVaR, exact
 * binomial failure-probability bounds, and their shift-hardened variants.
 *
 * Every fallible function returns an RcStatus and writes its result
 * through out-pointers, which are left untouched on failure. Functions
 * never unwind across this boundary: an internal invariant violation
 * aborts the process instead of corrupting the caller.
 */

#ifndef RISKCERT_H
#define RISKCERT_H

/* Generated by cbindgen from the riskcert-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a riskcert call.
typedef enum {
  // Success.
  RC_STATUS_OK = 0,
  // A parameter was out of range (confidence levels, quantile levels,
  // non-finite samples, counts exceeding trials, ...).
  RC_STATUS_INVALID_ARGUMENT = 1,
  // The sample size cannot support the requested guarantee.
  RC_STATUS_INSUFFICIENT_SAMPLES = 2,
  // The batch carries no almost-sure ceiling but the bound needs one.
  RC_STATUS_MISSING_UPPER_BOUND = 3,
  // The shift budget exceeds the largest value the bound can absorb.
  RC_STATUS_ALPHA_TOO_LARGE = 4,
  // Quantile level plus shift budget reaches or exceeds one.
  RC_STATUS_INVALID_QUANTILE = 5,
  // A required pointer argument was null.
  RC_STATUS_NULL_POINTER = 6,
  // An error class that only arises from richer entry points (file
  // handling, rollout execution) surfaced through this ABI.
  RC_STATUS_INTERNAL = 7,
} RcStatus;

// An immutable batch of scalar samples, optionally carrying an
// almost-sure upper bound on the sampled quantity.
typedef struct RcBatch RcBatch;

// One computed certificate.
//
// `k_index` is the 1-based order statistic the bound selected, or -1
// when the bound is not order-statistic shaped. `epsilon` is the CDF
// band half-width behind mean/CVaR bounds, or NaN when none was used.
// `defaulted` is true when the bound fell back to the almost-sure
// ceiling because the sample size could not support the confidence.
typedef struct {
  double value;
  int64_t k_index;
  double epsilon;
  bool defaulted;
  double nominal_confidence;
} RcBoundResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing riskcert call on the same thread; the
// string is empty when nothing failed yet.
const char *rc_last_error_message(void);

// Static description of a status code.
const char *rc_status_describe(RcStatus status);

// Creates a sample batch from `len` finite values. On success writes a
// handle to `out`; release it with `rc_batch_free`.
RcStatus rc_batch_new(const double *values, size_t len, RcBatch **out);

// Creates a sample batch that also records an almost-sure upper bound on
// the sampled quantity, enabling mean and CVaR certificates.
RcStatus rc_batch_new_with_upper_bound(const double *values,
                                       size_t len,
                                       double upper_bound,
                                       RcBatch **out);

// Releases a batch created by the constructors. Null is a no-op.
void rc_batch_free(RcBatch *batch);

// Number of samples in the batch; 0 for a null handle.
size_t rc_batch_len(const RcBatch *batch);

// Upper confidence bound on the `tau`-quantile of the sampled quantity,
// holding with probability at least `1 - delta`.
RcStatus rc_var_bound(const RcBatch *batch, double tau, double delta, RcBoundResult *out);

// Upper confidence bound on the mean; needs a batch with an upper bound.
RcStatus rc_expectation_bound(const RcBatch *batch, double delta, RcBoundResult *out);

// Upper confidence bound on the conditional value-at-risk above level
// `tau`; needs a batch with an upper bound.
RcStatus rc_cvar_bound(const RcBatch *batch, double tau, double delta, RcBoundResult *out);

// Exact binomial upper confidence bound on a failure probability from
// `failures` observed failures in `trials` independent trials.
RcStatus rc_failure_prob_bound(uint64_t failures,
                               uint64_t trials,
                               double delta,
                               RcBoundResult *out);

// Smallest sample size at which the quantile bound can avoid defaulting
// to the sample maximum's pathological `n = 1` case; writes it to `out`.
RcStatus rc_var_required_n(double tau, double delta, uint64_t *out);

// Quantile bound hardened against a one-sided distribution shift of at
// most `alpha` in Kolmogorov distance.
RcStatus rc_robust_var_bound(const RcBatch *batch,
                             double tau,
                             double delta,
                             double alpha,
                             RcBoundResult *out);

// CVaR bound hardened against a one-sided shift of at most `alpha`.
RcStatus rc_robust_cvar_bound(const RcBatch *batch,
                              double tau,
                              double delta,
                              double alpha,
                              RcBoundResult *out);

// Mean bound hardened against a one-sided shift of at most `alpha`.
RcStatus rc_robust_expectation_bound(const RcBatch *batch,
                                     double delta,
                                     double alpha,
                                     RcBoundResult *out);

// Failure-probability bound hardened against a failure-rate increase of
// at most `alpha`.
RcStatus rc_robust_failure_prob_bound(uint64_t failures,
                                      uint64_t trials,
                                      double delta,
                                      double alpha,
                                      RcBoundResult *out);

// Degraded error rate of a nominal `n`-sample quantile certificate when
// the deployed distribution shifts by at most `alpha`; writes the rate
// the guarantee decays to.
RcStatus rc_var_sensitivity(size_t n, double tau, double delta, double alpha, double *out);

// Degraded error rate of a nominal `n`-sample CDF-band certificate
// (mean or CVaR) under a shift of at most `alpha`.
RcStatus rc_cvar_sensitivity(size_t n, double delta, double alpha, double *out);

// Degraded error rate of a nominal `n`-trial failure-probability
// certificate built at simulator rate `q_sim` when the deployed rate
// grows by at most `alpha`.
RcStatus rc_failure_prob_sensitivity(uint64_t n,
                                     double q_sim,
                                     double delta,
                                     double alpha,
                                     double *out);

// Largest failure count in `n` trials that a `(tau, delta)`
// chance-constraint test still accepts, or -1 when no count is
// acceptable at that sample size.
RcStatus rc_acceptance_threshold(uint64_t n, double tau, double delta, int64_t *out);

// Probability that the `(tau, delta)` count test accepts a policy whose
// true per-rollout failure probability is `p`.
RcStatus rc_theoretical_acceptance_prob(uint64_t n,
                                        double tau,
                                        double delta,
                                        double p,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISKCERT_H */
