//! C ABI over the certification kernels.
//!
//! The surface is deliberately small: sample batches as opaque handles,
//! one `repr(C)` result struct, and flat functions for every bound,
//! robust bound, and sensitivity computation. Everything fallible returns
//! an [`RcStatus`] and writes results through out-pointers, which are
//! left untouched on failure; the thread-local message behind
//! [`rc_last_error_message`] carries the human-readable detail.
//!
//! The generated header lands in `include/riskcert.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::slice;

use riskcert::bounds::{
    cvar_bound, expectation_bound, failure_prob_bound, var_bound, var_required_n, BoundResult,
};
use riskcert::error::Error;
use riskcert::shift::{
    cvar_sensitivity, failure_prob_sensitivity, robust_cvar_bound, robust_expectation_bound,
    robust_failure_prob_bound, robust_var_bound, var_sensitivity,
};
use riskcert::stats::SampleBatch;
use riskcert::verify::{acceptance_threshold, theoretical_acceptance_prob};

/// Outcome of a riskcert call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    /// Success.
    Ok = 0,
    /// A parameter was out of range (confidence levels, quantile levels,
    /// non-finite samples, counts exceeding trials, ...).
    InvalidArgument = 1,
    /// The sample size cannot support the requested guarantee.
    InsufficientSamples = 2,
    /// The batch carries no almost-sure ceiling but the bound needs one.
    MissingUpperBound = 3,
    /// The shift budget exceeds the largest value the bound can absorb.
    AlphaTooLarge = 4,
    /// Quantile level plus shift budget reaches or exceeds one.
    InvalidQuantile = 5,
    /// A required pointer argument was null.
    NullPointer = 6,
    /// An error class that only arises from richer entry points (file
    /// handling, rollout execution) surfaced through this ABI.
    Internal = 7,
}

/// One computed certificate.
///
/// `k_index` is the 1-based order statistic the bound selected, or -1
/// when the bound is not order-statistic shaped. `epsilon` is the CDF
/// band half-width behind mean/CVaR bounds, or NaN when none was used.
/// `defaulted` is true when the bound fell back to the almost-sure
/// ceiling because the sample size could not support the confidence.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcBoundResult {
    pub value: f64,
    pub k_index: i64,
    pub epsilon: f64,
    pub defaulted: bool,
    pub nominal_confidence: f64,
}

/// An immutable batch of scalar samples, optionally carrying an
/// almost-sure upper bound on the sampled quantity.
pub struct RcBatch {
    inner: SampleBatch,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(err: &Error) -> RcStatus {
    let message = CString::new(err.to_string())
        .unwrap_or_else(|_| CString::new("error message held an interior nul byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    match err {
        Error::InvalidArgument(_) => RcStatus::InvalidArgument,
        Error::InsufficientSamples { .. } => RcStatus::InsufficientSamples,
        Error::MissingUpperBound { .. } => RcStatus::MissingUpperBound,
        Error::AlphaTooLarge { .. } => RcStatus::AlphaTooLarge,
        Error::InvalidQuantile { .. } => RcStatus::InvalidQuantile,
        _ => RcStatus::Internal,
    }
}

fn null_pointer(what: &str) -> RcStatus {
    let message = CString::new(format!("{what} must not be null")).unwrap();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    RcStatus::NullPointer
}

fn write_result(out: *mut RcBoundResult, bound: BoundResult) -> RcStatus {
    let result = RcBoundResult {
        value: bound.value,
        k_index: bound.k_index.map_or(-1, |k| k as i64),
        epsilon: bound.epsilon.unwrap_or(f64::NAN),
        defaulted: bound.defaulted,
        nominal_confidence: bound.nominal_confidence,
    };
    // Safety: the caller promised a writable RcBoundResult; null was
    // rejected before computing anything.
    unsafe { out.write(result) };
    RcStatus::Ok
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing riskcert call on the same thread; the
/// string is empty when nothing failed yet.
#[no_mangle]
pub extern "C" fn rc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn rc_status_describe(status: RcStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        RcStatus::Ok => b"ok\0",
        RcStatus::InvalidArgument => b"invalid argument\0",
        RcStatus::InsufficientSamples => b"insufficient samples for the requested guarantee\0",
        RcStatus::MissingUpperBound => b"batch carries no upper bound but the bound needs one\0",
        RcStatus::AlphaTooLarge => b"shift budget exceeds what the bound can absorb\0",
        RcStatus::InvalidQuantile => b"quantile level plus shift budget reaches one\0",
        RcStatus::NullPointer => b"required pointer was null\0",
        RcStatus::Internal => b"internal error\0",
    };
    text.as_ptr().cast()
}

fn build_batch(
    values: *const f64,
    len: usize,
    upper_bound: Option<f64>,
    out: *mut *mut RcBatch,
) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    if values.is_null() {
        return null_pointer("values");
    }
    // Safety: the caller promised `len` readable doubles at `values`.
    let values = unsafe { slice::from_raw_parts(values, len) }.to_vec();
    let built = match upper_bound {
        Some(ub) => SampleBatch::with_upper_bound(values, ub),
        None => SampleBatch::new(values),
    };
    match built {
        Ok(inner) => {
            let handle = Box::into_raw(Box::new(RcBatch { inner }));
            // Safety: `out` was checked non-null above.
            unsafe { out.write(handle) };
            RcStatus::Ok
        }
        Err(err) => set_last_error(&err),
    }
}

/// Creates a sample batch from `len` finite values. On success writes a
/// handle to `out`; release it with `rc_batch_free`.
#[no_mangle]
pub extern "C" fn rc_batch_new(values: *const f64, len: usize, out: *mut *mut RcBatch) -> RcStatus {
    build_batch(values, len, None, out)
}

/// Creates a sample batch that also records an almost-sure upper bound on
/// the sampled quantity, enabling mean and CVaR certificates.
#[no_mangle]
pub extern "C" fn rc_batch_new_with_upper_bound(
    values: *const f64,
    len: usize,
    upper_bound: f64,
    out: *mut *mut RcBatch,
) -> RcStatus {
    build_batch(values, len, Some(upper_bound), out)
}

/// Releases a batch created by the constructors. Null is a no-op.
#[no_mangle]
pub extern "C" fn rc_batch_free(batch: *mut RcBatch) {
    if !batch.is_null() {
        // Safety: the handle came from Box::into_raw in build_batch and is
        // released exactly once by contract.
        drop(unsafe { Box::from_raw(batch) });
    }
}

/// Number of samples in the batch; 0 for a null handle.
#[no_mangle]
pub extern "C" fn rc_batch_len(batch: *const RcBatch) -> usize {
    if batch.is_null() {
        return 0;
    }
    // Safety: non-null handles from the constructors stay valid until freed.
    unsafe { &*batch }.inner.n()
}

macro_rules! try_batch {
    ($batch:expr, $out:expr) => {{
        if $out.is_null() {
            return null_pointer("out");
        }
        if $batch.is_null() {
            return null_pointer("batch");
        }
        // Safety: non-null handles from the constructors stay valid until
        // freed; the caller may not free them mid-call.
        &unsafe { &*$batch }.inner
    }};
}

fn finish(out: *mut RcBoundResult, result: Result<BoundResult, Error>) -> RcStatus {
    match result {
        Ok(bound) => write_result(out, bound),
        Err(err) => set_last_error(&err),
    }
}

/// Upper confidence bound on the `tau`-quantile of the sampled quantity,
/// holding with probability at least `1 - delta`.
#[no_mangle]
pub extern "C" fn rc_var_bound(
    batch: *const RcBatch,
    tau: f64,
    delta: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    let batch = try_batch!(batch, out);
    finish(out, var_bound(batch, tau, delta))
}

/// Upper confidence bound on the mean; needs a batch with an upper bound.
#[no_mangle]
pub extern "C" fn rc_expectation_bound(
    batch: *const RcBatch,
    delta: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    let batch = try_batch!(batch, out);
    finish(out, expectation_bound(batch, delta))
}

/// Upper confidence bound on the conditional value-at-risk above level
/// `tau`; needs a batch with an upper bound.
#[no_mangle]
pub extern "C" fn rc_cvar_bound(
    batch: *const RcBatch,
    tau: f64,
    delta: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    let batch = try_batch!(batch, out);
    finish(out, cvar_bound(batch, tau, delta))
}

/// Exact binomial upper confidence bound on a failure probability from
/// `failures` observed failures in `trials` independent trials.
#[no_mangle]
pub extern "C" fn rc_failure_prob_bound(
    failures: u64,
    trials: u64,
    delta: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    finish(out, failure_prob_bound(failures, trials, delta))
}

/// Smallest sample size at which the quantile bound can avoid defaulting
/// to the sample maximum's pathological `n = 1` case; writes it to `out`.
#[no_mangle]
pub extern "C" fn rc_var_required_n(tau: f64, delta: f64, out: *mut u64) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    // The core helper assumes valid levels; C callers get them checked.
    if let Err(err) = riskcert::bounds::RiskSpec::var(tau, delta) {
        return set_last_error(&err);
    }
    // Safety: `out` was checked non-null above.
    unsafe { out.write(var_required_n(tau, delta) as u64) };
    RcStatus::Ok
}

/// Quantile bound hardened against a one-sided distribution shift of at
/// most `alpha` in Kolmogorov distance.
#[no_mangle]
pub extern "C" fn rc_robust_var_bound(
    batch: *const RcBatch,
    tau: f64,
    delta: f64,
    alpha: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    let batch = try_batch!(batch, out);
    finish(out, robust_var_bound(batch, tau, delta, alpha))
}

/// CVaR bound hardened against a one-sided shift of at most `alpha`.
#[no_mangle]
pub extern "C" fn rc_robust_cvar_bound(
    batch: *const RcBatch,
    tau: f64,
    delta: f64,
    alpha: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    let batch = try_batch!(batch, out);
    finish(out, robust_cvar_bound(batch, tau, delta, alpha))
}

/// Mean bound hardened against a one-sided shift of at most `alpha`.
#[no_mangle]
pub extern "C" fn rc_robust_expectation_bound(
    batch: *const RcBatch,
    delta: f64,
    alpha: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    let batch = try_batch!(batch, out);
    finish(out, robust_expectation_bound(batch, delta, alpha))
}

/// Failure-probability bound hardened against a failure-rate increase of
/// at most `alpha`.
#[no_mangle]
pub extern "C" fn rc_robust_failure_prob_bound(
    failures: u64,
    trials: u64,
    delta: f64,
    alpha: f64,
    out: *mut RcBoundResult,
) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    finish(out, robust_failure_prob_bound(failures, trials, delta, alpha))
}

/// Degraded error rate of a nominal `n`-sample quantile certificate when
/// the deployed distribution shifts by at most `alpha`; writes the rate
/// the guarantee decays to.
#[no_mangle]
pub extern "C" fn rc_var_sensitivity(
    n: usize,
    tau: f64,
    delta: f64,
    alpha: f64,
    out: *mut f64,
) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match var_sensitivity(n, tau, delta, alpha) {
        Ok(result) => {
            // Safety: `out` was checked non-null above.
            unsafe { out.write(result.delta_true) };
            RcStatus::Ok
        }
        Err(err) => set_last_error(&err),
    }
}

/// Degraded error rate of a nominal `n`-sample CDF-band certificate
/// (mean or CVaR) under a shift of at most `alpha`.
#[no_mangle]
pub extern "C" fn rc_cvar_sensitivity(n: usize, delta: f64, alpha: f64, out: *mut f64) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match cvar_sensitivity(n, delta, alpha) {
        Ok(result) => {
            // Safety: `out` was checked non-null above.
            unsafe { out.write(result.delta_true) };
            RcStatus::Ok
        }
        Err(err) => set_last_error(&err),
    }
}

/// Degraded error rate of a nominal `n`-trial failure-probability
/// certificate built at simulator rate `q_sim` when the deployed rate
/// grows by at most `alpha`.
#[no_mangle]
pub extern "C" fn rc_failure_prob_sensitivity(
    n: u64,
    q_sim: f64,
    delta: f64,
    alpha: f64,
    out: *mut f64,
) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match failure_prob_sensitivity(n, q_sim, delta, alpha) {
        Ok(result) => {
            // Safety: `out` was checked non-null above.
            unsafe { out.write(result.delta_true) };
            RcStatus::Ok
        }
        Err(err) => set_last_error(&err),
    }
}

/// Largest failure count in `n` trials that a `(tau, delta)`
/// chance-constraint test still accepts, or -1 when no count is
/// acceptable at that sample size.
#[no_mangle]
pub extern "C" fn rc_acceptance_threshold(
    n: u64,
    tau: f64,
    delta: f64,
    out: *mut i64,
) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match acceptance_threshold(n, tau, delta) {
        Ok(threshold) => {
            // Safety: `out` was checked non-null above.
            unsafe { out.write(threshold.map_or(-1, |k| k as i64)) };
            RcStatus::Ok
        }
        Err(err) => set_last_error(&err),
    }
}

/// Probability that the `(tau, delta)` count test accepts a policy whose
/// true per-rollout failure probability is `p`.
#[no_mangle]
pub extern "C" fn rc_theoretical_acceptance_prob(
    n: u64,
    tau: f64,
    delta: f64,
    p: f64,
    out: *mut f64,
) -> RcStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    match theoretical_acceptance_prob(n, tau, delta, p) {
        Ok(prob) => {
            // Safety: `out` was checked non-null above.
            unsafe { out.write(prob) };
            RcStatus::Ok
        }
        Err(err) => set_last_error(&err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    fn batch_from(values: &[f64]) -> *mut RcBatch {
        let mut handle: *mut RcBatch = ptr::null_mut();
        let status = rc_batch_new(values.as_ptr(), values.len(), &mut handle);
        assert_eq!(status, RcStatus::Ok);
        handle
    }

    #[test]
    fn var_bound_matches_the_core_library() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let handle = batch_from(&values);
        let mut out = RcBoundResult {
            value: 0.0,
            k_index: 0,
            epsilon: 0.0,
            defaulted: true,
            nominal_confidence: 0.0,
        };
        assert_eq!(rc_var_bound(handle, 0.7, 0.2, &mut out), RcStatus::Ok);
        let core = var_bound(&SampleBatch::new(values).unwrap(), 0.7, 0.2).unwrap();
        assert_eq!(out.value, core.value);
        assert_eq!(out.k_index, core.k_index.unwrap() as i64);
        assert!(out.epsilon.is_nan());
        assert!(!out.defaulted);
        assert_eq!(out.nominal_confidence, 0.8);
        rc_batch_free(handle);
    }

    #[test]
    fn cvar_needs_an_upper_bound_and_reports_it() {
        let values = [0.1, 0.5, 0.9];
        let handle = batch_from(&values);
        let mut out = RcBoundResult {
            value: -1.0,
            k_index: 0,
            epsilon: 0.0,
            defaulted: false,
            nominal_confidence: 0.0,
        };
        assert_eq!(rc_cvar_bound(handle, 0.7, 0.2, &mut out), RcStatus::MissingUpperBound);
        assert_eq!(out.value, -1.0, "failure must leave the out-struct untouched");
        let msg = unsafe { CStr::from_ptr(rc_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("upper bound"));
        rc_batch_free(handle);

        let mut with_ub: *mut RcBatch = ptr::null_mut();
        assert_eq!(
            rc_batch_new_with_upper_bound(values.as_ptr(), values.len(), 1.0, &mut with_ub),
            RcStatus::Ok
        );
        assert_eq!(rc_cvar_bound(with_ub, 0.7, 0.2, &mut out), RcStatus::Ok);
        assert!(out.defaulted, "n = 3 cannot support a non-vacuous CVaR bound");
        assert_eq!(out.value, 1.0);
        rc_batch_free(with_ub);
    }

    #[test]
    fn failure_tally_bound_matches_the_frozen_value() {
        let mut out = RcBoundResult {
            value: 0.0,
            k_index: 0,
            epsilon: 0.0,
            defaulted: true,
            nominal_confidence: 0.0,
        };
        assert_eq!(rc_failure_prob_bound(0, 10, 0.2, &mut out), RcStatus::Ok);
        assert!((out.value - 0.148_660_077_479_215_4).abs() < 1e-12);
        assert_eq!(rc_failure_prob_bound(11, 10, 0.2, &mut out), RcStatus::InvalidArgument);
    }

    #[test]
    fn scalar_helpers_round_trip() {
        let mut n = 0u64;
        assert_eq!(rc_var_required_n(0.7, 0.2, &mut n), RcStatus::Ok);
        assert_eq!(n, 5);

        let mut threshold = 0i64;
        assert_eq!(rc_acceptance_threshold(100, 0.7, 0.2, &mut threshold), RcStatus::Ok);
        assert_eq!(threshold, 25);
        assert_eq!(rc_acceptance_threshold(1, 0.999, 0.001, &mut threshold), RcStatus::Ok);
        assert_eq!(threshold, -1, "one trial cannot certify tau = 0.999");

        let mut prob = 0.0f64;
        assert_eq!(rc_theoretical_acceptance_prob(100, 0.7, 0.2, 0.25, &mut prob), RcStatus::Ok);
        assert!((0.0..=1.0).contains(&prob));

        let mut delta_true = 0.0f64;
        assert_eq!(rc_var_sensitivity(10, 0.7, 0.2, 0.1, &mut delta_true), RcStatus::Ok);
        assert!((delta_true - 0.375_809_638_4).abs() < 1e-9);
    }

    #[test]
    fn robust_bounds_match_the_core_library() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let mut handle: *mut RcBatch = ptr::null_mut();
        assert_eq!(
            rc_batch_new_with_upper_bound(values.as_ptr(), values.len(), 1.0, &mut handle),
            RcStatus::Ok
        );
        let mut out = RcBoundResult {
            value: 0.0,
            k_index: 0,
            epsilon: 0.0,
            defaulted: true,
            nominal_confidence: 0.0,
        };
        let batch = SampleBatch::with_upper_bound(values, 1.0).unwrap();

        assert_eq!(rc_robust_var_bound(handle, 0.7, 0.2, 0.05, &mut out), RcStatus::Ok);
        assert_eq!(out.value, robust_var_bound(&batch, 0.7, 0.2, 0.05).unwrap().value);

        assert_eq!(rc_robust_cvar_bound(handle, 0.7, 0.2, 0.05, &mut out), RcStatus::Ok);
        assert_eq!(out.value, robust_cvar_bound(&batch, 0.7, 0.2, 0.05).unwrap().value);

        assert_eq!(rc_robust_expectation_bound(handle, 0.2, 0.05, &mut out), RcStatus::Ok);
        assert_eq!(out.value, robust_expectation_bound(&batch, 0.2, 0.05).unwrap().value);

        assert_eq!(
            rc_robust_var_bound(handle, 0.7, 0.2, 0.31, &mut out),
            RcStatus::InvalidQuantile,
            "tau + alpha reaching 1 must be rejected"
        );
        rc_batch_free(handle);

        assert_eq!(rc_robust_failure_prob_bound(0, 10, 0.2, 0.1, &mut out), RcStatus::Ok);
        assert!((out.value - 0.248_660_077_479_215_4).abs() < 1e-12);
    }

    #[test]
    fn null_pointers_are_rejected_not_dereferenced() {
        let mut out = RcBoundResult {
            value: 0.0,
            k_index: 0,
            epsilon: 0.0,
            defaulted: false,
            nominal_confidence: 0.0,
        };
        assert_eq!(rc_var_bound(ptr::null(), 0.7, 0.2, &mut out), RcStatus::NullPointer);
        let values = [0.5];
        let handle = batch_from(&values);
        assert_eq!(rc_var_bound(handle, 0.7, 0.2, ptr::null_mut()), RcStatus::NullPointer);
        rc_batch_free(handle);
        rc_batch_free(ptr::null_mut());

        let mut bad: *mut RcBatch = ptr::null_mut();
        assert_eq!(rc_batch_new(ptr::null(), 3, &mut bad), RcStatus::NullPointer);
        assert!(bad.is_null());
        assert_eq!(rc_batch_len(ptr::null()), 0);

        let described = unsafe { CStr::from_ptr(rc_status_describe(RcStatus::NullPointer)) };
        assert_eq!(described.to_str().unwrap(), "required pointer was null");
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let values = [0.1, f64::NAN];
        let mut handle: *mut RcBatch = ptr::null_mut();
        assert_eq!(
            rc_batch_new(values.as_ptr(), values.len(), &mut handle),
            RcStatus::InvalidArgument
        );
        assert!(handle.is_null());
    }
}
