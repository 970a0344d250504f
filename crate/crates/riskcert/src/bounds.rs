//! Finite-sample, distribution-free upper confidence bounds on risk
//! measures of a scalar cost, computed from an i.i.d. sample batch.
//!
//! Four measures are certified, each with probability at least `1 - delta`
//! over the draw of the batch and with no assumption on the cost
//! distribution beyond i.i.d. sampling (the expectation/CVaR bounds also
//! need a known almost-sure upper bound on the cost):
//!
//! * **Value-at-risk** (the `tau`-quantile): the smallest order statistic
//!   whose index `k*` satisfies `Bin(k* - 1; n, tau) >= 1 - delta`.
//! * **Expectation**: a weighted sum of the upper tail of the order
//!   statistics plus an `epsilon`-weighted upper-bound term, where
//!   `epsilon` is the one-sided empirical-CDF band half-width.
//! * **CVaR** (expected cost in the worst `1 - tau` tail): the same
//!   staircase construction restricted to quantile levels above `tau` and
//!   rescaled by `1 / (1 - tau)`. At `tau = 0` it reduces exactly to the
//!   expectation bound.
//! * **Failure probability** from a count of `k` failures in `n` binary
//!   trials: the exact one-sided binomial upper confidence limit, i.e. the
//!   largest `q` with `Bin(k; n, q) >= delta`.
//!
//! Two deliberately naive quantile bounds (`J_(n)` under the same
//! feasibility condition, and the order statistic picked by the symmetric
//! empirical-CDF band) are included as comparison baselines; the `k*` bound
//! is never weaker than either.

use crate::error::{Error, Result};
use crate::stats::{binom_cdf_ext, binom_cdf_inverse_p, dkw_gap, SampleBatch};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Risk-measure specification
// ---------------------------------------------------------------------------

/// The risk measure a certificate speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    ValueAtRisk,
    Expectation,
    Cvar,
    FailureProbability,
}

impl Measure {
    /// Stable lowercase name used in reports and CLI flags.
    pub fn name(&self) -> &'static str {
        match self {
            Measure::ValueAtRisk => "var",
            Measure::Expectation => "expectation",
            Measure::Cvar => "cvar",
            Measure::FailureProbability => "failure_probability",
        }
    }
}

/// A validated (measure, tau, delta) triple.
///
/// `tau` is the quantile level for value-at-risk (`(0, 1)`) and the tail
/// level for CVaR (`[0, 1)`, where 0 means the plain expectation tail). It
/// is unused — and forced to 0 — for expectation and failure probability.
/// `delta` is the per-certificate failure budget: `(0, 1)` for the binomial
/// measures, `(0, 0.5]` where the one-sided empirical-CDF band is involved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub measure: Measure,
    pub tau: f64,
    pub delta: f64,
}

impl RiskSpec {
    pub fn var(tau: f64, delta: f64) -> Result<Self> {
        require_open_unit("tau", tau)?;
        require_open_unit("delta", delta)?;
        Ok(Self { measure: Measure::ValueAtRisk, tau, delta })
    }

    pub fn expectation(delta: f64) -> Result<Self> {
        require_band_delta(delta)?;
        Ok(Self { measure: Measure::Expectation, tau: 0.0, delta })
    }

    pub fn cvar(tau: f64, delta: f64) -> Result<Self> {
        if !tau.is_finite() || !(0.0..1.0).contains(&tau) {
            return Err(Error::invalid(format!("cvar tail level tau must lie in [0, 1), got {tau}")));
        }
        require_band_delta(delta)?;
        Ok(Self { measure: Measure::Cvar, tau, delta })
    }

    pub fn failure_probability(delta: f64) -> Result<Self> {
        require_open_unit("delta", delta)?;
        Ok(Self { measure: Measure::FailureProbability, tau: 0.0, delta })
    }

    /// Same spec with the failure budget replaced (used by multi-policy
    /// correction, which certifies each policy at an inflated budget).
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        match self.measure {
            Measure::ValueAtRisk => Self::var(self.tau, delta),
            Measure::Expectation => Self::expectation(delta),
            Measure::Cvar => Self::cvar(self.tau, delta),
            Measure::FailureProbability => Self::failure_probability(delta),
        }
    }
}

fn require_open_unit(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 || v >= 1.0 {
        return Err(Error::invalid(format!("{name} must lie strictly in (0, 1), got {v}")));
    }
    Ok(())
}

fn require_band_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta <= 0.0 || delta > 0.5 {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 0.5] for empirical-CDF band bounds, got {delta}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Bound results
// ---------------------------------------------------------------------------

/// A one-sided certificate: with probability at least `nominal_confidence`
/// over the sampling of the batch, the true measure is at most `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub measure: Measure,
    /// The certified upper bound.
    pub value: f64,
    /// 1-based order-statistic index the bound is anchored at, when the
    /// construction uses one.
    pub k_index: Option<usize>,
    /// Empirical-CDF band half-width used, when the construction uses one.
    /// For robustified bounds this is the inflated width.
    pub epsilon: Option<f64>,
    /// True when the construction could not do better than the almost-sure
    /// upper bound and returned exactly that. The certificate is still
    /// valid, just vacuous.
    pub defaulted: bool,
    /// `1 - delta`.
    pub nominal_confidence: f64,
}

// ---------------------------------------------------------------------------
// Value-at-risk
// ---------------------------------------------------------------------------

/// Smallest 1-based index `k*` with `Bin(k* - 1; n, tau) >= 1 - delta`, the
/// order statistic that upper-bounds the `tau`-quantile with confidence
/// `1 - delta`. Errors with the minimal feasible `n` when no index works
/// (equivalently when `n < ln(delta) / ln(tau)`).
pub(crate) fn var_k_index(n: usize, tau: f64, delta: f64) -> Result<usize> {
    let conf = 1.0 - delta;
    for k in 1..=n {
        if binom_cdf_ext(k as i64 - 1, n as u64, tau)? >= conf {
            return Ok(k);
        }
    }
    Err(Error::InsufficientSamples { n, required: var_required_n(tau, delta) })
}

/// Minimal `n` for which the value-at-risk construction is feasible:
/// `ceil(ln(delta) / ln(tau))` (both logs negative). The tiny slack guards
/// the ceiling against the exact-integer boundary.
pub fn var_required_n(tau: f64, delta: f64) -> usize {
    let ratio = delta.ln() / tau.ln();
    (ratio - 1e-9).ceil().max(1.0) as usize
}

/// Distribution-free upper confidence bound on the `tau`-quantile
/// (value-at-risk) of the sampled cost at confidence `1 - delta`.
pub fn var_bound(batch: &SampleBatch, tau: f64, delta: f64) -> Result<BoundResult> {
    let spec = RiskSpec::var(tau, delta)?;
    let k = var_k_index(batch.n(), tau, delta)?;
    Ok(BoundResult {
        measure: spec.measure,
        value: batch.order_statistic(k)?,
        k_index: Some(k),
        epsilon: None,
        defaulted: false,
        nominal_confidence: 1.0 - delta,
    })
}

// ---------------------------------------------------------------------------
// Expectation and CVaR (shared staircase kernel)
// ---------------------------------------------------------------------------

/// Staircase bound shared by the expectation (`tau = 0`), CVaR and their
/// robustified variants (`extra_width > 0` inflates the band).
///
/// With `eps` the (possibly inflated) band half-width and `k` the smallest
/// index with `k/n - eps - tau >= 0`, the certified value is
///
/// ```text
/// ( eps * J_ub  +  (k/n - eps - tau) * J_(k)  +  (1/n) * sum_{i=k+1..n} J_(i) ) / (1 - tau)
/// ```
///
/// The three coefficients sum to exactly `1 - tau`, so the result is a
/// convex combination of `J_ub` and upper order statistics. When even the
/// band half-width exceeds the available tail mass (`eps > 1 - tau`) no
/// such `k` exists and the bound defaults to `J_ub`.
pub(crate) fn staircase_bound(
    batch: &SampleBatch,
    tau: f64,
    delta: f64,
    extra_width: f64,
    measure: Measure,
) -> Result<BoundResult> {
    let context = match measure {
        Measure::Expectation => "the expectation bound",
        _ => "the CVaR bound",
    };
    let ub = batch
        .upper_bound()
        .ok_or(Error::MissingUpperBound { context })?;
    let n = batch.n();
    let n_f = n as f64;
    let eps = dkw_gap(delta, n as u64)? + extra_width;
    let confidence = 1.0 - delta;

    if eps > 1.0 - tau {
        return Ok(BoundResult {
            measure,
            value: ub,
            k_index: None,
            epsilon: Some(eps),
            defaulted: true,
            nominal_confidence: confidence,
        });
    }

    // Smallest k with k/n - eps - tau >= 0, located by a short scan so that
    // the comparison semantics are exactly the f64 predicate used here (a
    // pure ceiling can disagree by one ulp after the division).
    let mut k = ((eps + tau) * n_f).floor() as usize;
    k = k.max(1);
    while k <= n && (k as f64) / n_f - eps - tau < 0.0 {
        k += 1;
    }
    if k > n {
        // Only reachable within a few ulps of eps == 1 - tau; the defaulted
        // certificate is the honest answer there.
        return Ok(BoundResult {
            measure,
            value: ub,
            k_index: None,
            epsilon: Some(eps),
            defaulted: true,
            nominal_confidence: confidence,
        });
    }

    let j_k = batch.order_statistic(k)?;
    let tail: f64 = batch.values()[k..].iter().sum();
    let coeff = ((k as f64) / n_f - eps - tau).max(0.0);
    let value = (eps * ub + coeff * j_k + tail / n_f) / (1.0 - tau);
    Ok(BoundResult {
        measure,
        value,
        k_index: Some(k),
        epsilon: Some(eps),
        defaulted: false,
        nominal_confidence: confidence,
    })
}

/// Distribution-free upper confidence bound on the expected cost at
/// confidence `1 - delta`. Requires the batch to carry an almost-sure cost
/// upper bound; defaults to that bound (flagged) when `n < -ln(delta) / 2`,
/// i.e. when the band is wider than the whole unit of probability mass.
pub fn expectation_bound(batch: &SampleBatch, delta: f64) -> Result<BoundResult> {
    let spec = RiskSpec::expectation(delta)?;
    staircase_bound(batch, 0.0, delta, 0.0, spec.measure)
}

/// Distribution-free upper confidence bound on the CVaR at tail level `tau`
/// (the expected cost conditional on the worst `1 - tau` fraction) at
/// confidence `1 - delta`. At `tau = 0` this is exactly
/// [`expectation_bound`]. Defaults to the upper bound (flagged) when
/// `n < -ln(delta) / (2 (1 - tau)^2)`.
pub fn cvar_bound(batch: &SampleBatch, tau: f64, delta: f64) -> Result<BoundResult> {
    let spec = RiskSpec::cvar(tau, delta)?;
    staircase_bound(batch, tau, delta, 0.0, spec.measure)
}

// ---------------------------------------------------------------------------
// Failure probability
// ---------------------------------------------------------------------------

/// Exact one-sided upper confidence limit on a Bernoulli failure
/// probability from `failures` failures in `n` trials: the largest `q` with
/// `Bin(failures; n, q) >= delta`. Equals 1 when every trial failed.
pub fn failure_prob_bound(failures: u64, n: u64, delta: f64) -> Result<BoundResult> {
    if n == 0 {
        return Err(Error::invalid("failure probability bound needs n >= 1 trials"));
    }
    if failures > n {
        return Err(Error::invalid(format!("failure count {failures} exceeds trial count {n}")));
    }
    require_open_unit("delta", delta)?;
    let value = binom_cdf_inverse_p(failures, n, delta)?;
    Ok(BoundResult {
        measure: Measure::FailureProbability,
        value,
        k_index: None,
        epsilon: None,
        defaulted: false,
        nominal_confidence: 1.0 - delta,
    })
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Naive baseline: the sample maximum `J_(n)`, valid under the same
/// feasibility condition as [`var_bound`] and never tighter than it.
pub fn var_bound_max_baseline(batch: &SampleBatch, tau: f64, delta: f64) -> Result<BoundResult> {
    RiskSpec::var(tau, delta)?;
    let n = batch.n();
    if binom_cdf_ext(n as i64 - 1, n as u64, tau)? < 1.0 - delta {
        return Err(Error::InsufficientSamples { n, required: var_required_n(tau, delta) });
    }
    Ok(BoundResult {
        measure: Measure::ValueAtRisk,
        value: batch.order_statistic(n)?,
        k_index: Some(n),
        epsilon: None,
        defaulted: false,
        nominal_confidence: 1.0 - delta,
    })
}

/// Baseline built from the symmetric empirical-CDF band: the order
/// statistic at index `ceil(n (tau + eps))`, where `eps` is the band
/// half-width. Needs `delta <= 0.5` and errors when the index exceeds `n`.
/// Never tighter than [`var_bound`].
pub fn var_bound_dkw_baseline(batch: &SampleBatch, tau: f64, delta: f64) -> Result<BoundResult> {
    require_open_unit("tau", tau)?;
    let n = batch.n();
    let n_f = n as f64;
    let eps = dkw_gap(delta, n as u64)?;
    let mut k = ((tau + eps) * n_f).floor() as usize;
    k = k.max(1);
    while k <= n && (k as f64) / n_f < tau + eps {
        k += 1;
    }
    if k > n {
        // Feasible once eps(n) <= 1 - tau, i.e. n >= -ln(delta)/(2 (1-tau)^2).
        let required = ((-delta.ln()) / (2.0 * (1.0 - tau) * (1.0 - tau)) - 1e-9).ceil().max(1.0);
        return Err(Error::InsufficientSamples { n, required: required as usize });
    }
    Ok(BoundResult {
        measure: Measure::ValueAtRisk,
        value: batch.order_statistic(k)?,
        k_index: Some(k),
        epsilon: Some(eps),
        defaulted: false,
        nominal_confidence: 1.0 - delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ladder(n: usize) -> SampleBatch {
        // J_(i) = i / n with upper bound 1 — order statistics are read off
        // directly, which keeps expected values exact.
        SampleBatch::with_upper_bound((1..=n).map(|i| i as f64 / n as f64).collect(), 1.0).unwrap()
    }

    fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
        assert!(
            (actual - expected).abs() <= tol,
            "{what}: got {actual}, expected {expected} (tol {tol})"
        );
    }

    // -- value-at-risk ------------------------------------------------------

    #[test]
    fn var_bound_picks_k_star_9_of_10() {
        // Bin(8; 10, 0.7) = 0.8507 >= 0.8 while Bin(7; 10, 0.7) = 0.6172 < 0.8.
        let b = var_bound(&ladder(10), 0.7, 0.2).unwrap();
        assert_eq!(b.k_index, Some(9));
        assert_eq!(b.value, 0.9);
        assert_eq!(b.defaulted, false);
        assert_close(b.nominal_confidence, 0.8, 1e-15, "confidence");
    }

    #[test]
    fn var_bound_minimum_feasible_n_is_5() {
        // Bin(4; 5, 0.7) = 0.83193 >= 0.8: the maximum works at exactly n = 5.
        let b = var_bound(&ladder(5), 0.7, 0.2).unwrap();
        assert_eq!(b.k_index, Some(5));
        assert_eq!(b.value, 1.0);
        // One fewer sample is infeasible, and the error reports the minimum.
        match var_bound(&ladder(4), 0.7, 0.2) {
            Err(Error::InsufficientSamples { n: 4, required: 5 }) => {}
            other => panic!("expected InsufficientSamples {{4, 5}}, got {other:?}"),
        }
    }

    #[test]
    fn var_bound_k_star_75_of_100() {
        // Frozen from the exact rational oracle scan.
        let b = var_bound(&ladder(100), 0.7, 0.2).unwrap();
        assert_eq!(b.k_index, Some(75));
    }

    #[test]
    fn var_bound_rejects_bad_levels() {
        assert!(var_bound(&ladder(10), 0.0, 0.2).is_err());
        assert!(var_bound(&ladder(10), 1.0, 0.2).is_err());
        assert!(var_bound(&ladder(10), 0.7, 0.0).is_err());
        assert!(var_bound(&ladder(10), 0.7, 1.0).is_err());
    }

    // -- expectation ----------------------------------------------------------

    #[test]
    fn expectation_bound_matches_frozen_ladder_value() {
        // n = 100, delta = 0.2: eps = 0.08970612889970507, k = 9; value
        // frozen from direct evaluation on the ladder batch.
        let b = expectation_bound(&ladder(100), 0.2).unwrap();
        assert_eq!(b.k_index, Some(9));
        assert_close(b.epsilon.unwrap(), 0.08970612889970507, 1e-15, "eps");
        assert_close(b.value, 0.5902325772987316, 1e-12, "value");
        assert!(!b.defaulted);
    }

    #[test]
    fn expectation_bound_single_sample() {
        // n = 1, delta = 0.2: eps = 0.8970612889970507 < 1, k = 1, value =
        // eps * 1 + (1 - eps) * J_(1) with J_(1) = 0.3.
        let batch = SampleBatch::with_upper_bound(vec![0.3], 1.0).unwrap();
        let b = expectation_bound(&batch, 0.2).unwrap();
        assert_eq!(b.k_index, Some(1));
        assert_close(b.value, 0.9279429022979355, 1e-12, "n=1 value");
        assert!(!b.defaulted);
    }

    #[test]
    fn expectation_bound_defaults_when_band_exceeds_one() {
        // n = 1, delta = 0.1: -ln(0.1)/2 = 1.1513 > 1, so eps > 1 and the
        // bound falls back to the declared ceiling, flagged as defaulted.
        let batch = SampleBatch::with_upper_bound(vec![0.3], 7.5).unwrap();
        let b = expectation_bound(&batch, 0.1).unwrap();
        assert!(b.defaulted);
        assert_eq!(b.value, 7.5);
        assert_eq!(b.k_index, None);
    }

    #[test]
    fn expectation_bound_requires_upper_bound() {
        let batch = SampleBatch::new(vec![0.3, 0.4]).unwrap();
        match expectation_bound(&batch, 0.2) {
            Err(Error::MissingUpperBound { .. }) => {}
            other => panic!("expected MissingUpperBound, got {other:?}"),
        }
    }

    #[test]
    fn expectation_bound_of_constant_batch_interpolates_to_ub() {
        // All samples equal c: bound = eps * ub + (1 - eps) * c exactly.
        let batch = SampleBatch::with_upper_bound(vec![0.4; 50], 1.0).unwrap();
        let b = expectation_bound(&batch, 0.2).unwrap();
        let eps = b.epsilon.unwrap();
        assert_close(b.value, eps * 1.0 + (1.0 - eps) * 0.4, 1e-12, "constant batch");
    }

    // -- CVaR -----------------------------------------------------------------

    #[test]
    fn cvar_bound_matches_frozen_ladder_value() {
        // n = 100, tau = 0.7, delta = 0.2: k = 79, coefficient on J_(79) is
        // 79/100 - eps - 0.7 = 0.00029387110029499564; value frozen from
        // direct evaluation on the ladder batch.
        let b = cvar_bound(&ladder(100), 0.7, 0.2).unwrap();
        assert_eq!(b.k_index, Some(79));
        assert_close(b.value, 0.9297942902297937, 1e-12, "cvar value");
        let coeff = 79.0 / 100.0 - b.epsilon.unwrap() - 0.7;
        assert_close(coeff, 0.00029387110029499564, 1e-15, "cvar coefficient");
    }

    #[test]
    fn cvar_bound_defaults_below_threshold() {
        // tau = 0.7, delta = 0.2 needs n >= 8.9413; n = 8 must default.
        let b = cvar_bound(&ladder(8), 0.7, 0.2).unwrap();
        assert!(b.defaulted);
        assert_eq!(b.value, 1.0);
        // n = 9 is just feasible.
        assert!(!cvar_bound(&ladder(9), 0.7, 0.2).unwrap().defaulted);
    }

    #[test]
    fn cvar_at_tau_zero_is_exactly_the_expectation_bound() {
        for n in [1usize, 3, 10, 57, 100] {
            let batch = ladder(n);
            let e = expectation_bound(&batch, 0.2).unwrap();
            let c = cvar_bound(&batch, 0.0, 0.2).unwrap();
            assert_eq!(e.value.to_bits(), c.value.to_bits(), "bit-exact at n={n}");
            assert_eq!(e.k_index, c.k_index);
        }
    }

    #[test]
    fn cvar_of_all_ones_batch_is_exactly_one() {
        // Coefficient normalization: on a batch of all ones with ub = 1 the
        // convex combination must collapse to exactly 1 / (1 - tau) * (1 - tau).
        for tau in [0.0, 0.3, 0.7] {
            let batch = SampleBatch::with_upper_bound(vec![1.0; 40], 1.0).unwrap();
            let b = cvar_bound(&batch, tau, 0.2).unwrap();
            assert_close(b.value, 1.0, 1e-12, &format!("all-ones tau={tau}"));
        }
    }

    #[test]
    fn cvar_rejects_tau_one_and_bad_delta() {
        assert!(cvar_bound(&ladder(10), 1.0, 0.2).is_err());
        assert!(cvar_bound(&ladder(10), -0.1, 0.2).is_err());
        assert!(cvar_bound(&ladder(10), 0.7, 0.6).is_err());
        // tau = 0 is legal (expectation tail).
        assert!(cvar_bound(&ladder(10), 0.0, 0.2).is_ok());
    }

    // -- failure probability ---------------------------------------------------

    #[test]
    fn failure_prob_bound_examples() {
        // k = 0, n = 10, delta = 0.2: closed form 1 - 0.2^(1/10).
        let b = failure_prob_bound(0, 10, 0.2).unwrap();
        assert_close(b.value, 1.0 - 0.2f64.powf(0.1), 1e-9, "k=0");
        // k = n saturates at 1.
        assert_eq!(failure_prob_bound(10, 10, 0.2).unwrap().value, 1.0);
        // Frozen root of (1-q)^9 (1+9q) = 0.2.
        let b = failure_prob_bound(1, 10, 0.2).unwrap();
        assert_close(b.value, 0.2709881503934112, 1e-9, "k=1");
    }

    #[test]
    fn failure_prob_bound_rejects_bad_input() {
        assert!(failure_prob_bound(11, 10, 0.2).is_err());
        assert!(failure_prob_bound(0, 0, 0.2).is_err());
        assert!(failure_prob_bound(0, 10, 0.0).is_err());
        assert!(failure_prob_bound(0, 10, 1.0).is_err());
    }

    // -- baselines --------------------------------------------------------------

    #[test]
    fn dkw_baseline_index_79_of_100() {
        let b = var_bound_dkw_baseline(&ladder(100), 0.7, 0.2).unwrap();
        assert_eq!(b.k_index, Some(79));
        assert_eq!(b.value, 0.79);
    }

    #[test]
    fn dkw_baseline_infeasible_at_tau_095_n_100() {
        // ceil(100 * (0.95 + 0.0897)) = 104 > 100.
        match var_bound_dkw_baseline(&ladder(100), 0.95, 0.2) {
            Err(Error::InsufficientSamples { n: 100, required }) => {
                // -ln(0.2) / (2 * 0.05^2) = 321.9 -> 322.
                assert_eq!(required, 322);
            }
            other => panic!("expected InsufficientSamples, got {other:?}"),
        }
    }

    #[test]
    fn max_baseline_tracks_var_feasibility() {
        let b = var_bound_max_baseline(&ladder(10), 0.7, 0.2).unwrap();
        assert_eq!(b.k_index, Some(10));
        assert_eq!(b.value, 1.0);
        assert!(var_bound_max_baseline(&ladder(4), 0.7, 0.2).is_err());
    }

    // -- invariants ---------------------------------------------------------------

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn var_bound_monotone_in_tau_and_delta(
            n in 6usize..=60,
            tau in 0.05f64..0.9,
            bump in 0.01f64..0.09,
            delta in 0.05f64..0.45,
        ) {
            let batch = ladder(n);
            if let (Ok(lo), Ok(hi)) = (var_bound(&batch, tau, delta), var_bound(&batch, tau + bump, delta)) {
                prop_assert!(hi.value >= lo.value, "VaR bound must grow with tau");
            }
            if let (Ok(tight), Ok(loose)) = (var_bound(&batch, tau, delta), var_bound(&batch, tau, delta + bump)) {
                prop_assert!(loose.value <= tight.value, "VaR bound must shrink as delta grows");
            }
        }

        #[test]
        fn staircase_weights_are_a_convex_combination(
            n in 1usize..=200,
            tau in 0.0f64..0.95,
            delta in 0.01f64..=0.5,
        ) {
            let batch = ladder(n);
            let b = cvar_bound(&batch, tau, delta).unwrap();
            if !b.defaulted {
                let eps = b.epsilon.unwrap();
                let k = b.k_index.unwrap();
                let coeff = k as f64 / n as f64 - eps - tau;
                prop_assert!(coeff >= 0.0, "order-statistic coefficient must be nonnegative");
                prop_assert!(coeff < 1.0 - tau + 1e-12);
                // eps + coeff + (n - k)/n = 1 - tau exactly (up to roundoff).
                let total = eps + coeff + (n - k) as f64 / n as f64;
                prop_assert!((total - (1.0 - tau)).abs() <= 1e-9, "weights sum to 1 - tau, got {total}");
                // Bound lies within [J_(k), ub] scaled: it is a convex combination.
                prop_assert!(b.value <= 1.0 + 1e-12);
                prop_assert!(b.value >= batch.order_statistic(k).unwrap() - 1e-12);
            }
        }

        #[test]
        fn cvar_dominates_expectation_and_var(
            n in 10usize..=150,
            tau in 0.05f64..0.9,
            delta in 0.01f64..=0.5,
        ) {
            let batch = ladder(n);
            let c = cvar_bound(&batch, tau, delta).unwrap();
            let e = expectation_bound(&batch, delta).unwrap();
            prop_assert!(c.value >= e.value - 1e-12, "CVaR bound under expectation bound");
            if let Ok(v) = var_bound(&batch, tau, delta) {
                if !c.defaulted {
                    prop_assert!(c.value >= v.value - 1e-12, "CVaR bound under VaR bound");
                }
            }
        }

        #[test]
        fn cvar_monotone_in_tau(
            n in 10usize..=150,
            tau in 0.0f64..0.85,
            bump in 0.01f64..0.1,
            delta in 0.01f64..=0.5,
        ) {
            let batch = ladder(n);
            let lo = cvar_bound(&batch, tau, delta).unwrap();
            let hi = cvar_bound(&batch, tau + bump, delta).unwrap();
            prop_assert!(hi.value >= lo.value - 1e-12);
        }

        #[test]
        fn quantile_bound_never_beaten_by_baselines(
            n in 5usize..=200,
            tau in 0.3f64..0.9,
            delta in 0.01f64..=0.5,
        ) {
            let batch = ladder(n);
            if let Ok(main) = var_bound(&batch, tau, delta) {
                if let Ok(maxb) = var_bound_max_baseline(&batch, tau, delta) {
                    prop_assert!(main.value <= maxb.value);
                    prop_assert!(main.k_index.unwrap() <= maxb.k_index.unwrap());
                }
                if let Ok(dkwb) = var_bound_dkw_baseline(&batch, tau, delta) {
                    prop_assert!(main.value <= dkwb.value);
                    prop_assert!(main.k_index.unwrap() <= dkwb.k_index.unwrap());
                }
            }
        }

        #[test]
        fn failure_prob_bound_monotone_in_failures(n in 1u64..=60, delta in 0.01f64..0.99) {
            let mut prev = 0.0;
            for k in 0..=n {
                let b = failure_prob_bound(k, n, delta).unwrap();
                prop_assert!(b.value >= prev - 1e-12);
                prop_assert!((0.0..=1.0).contains(&b.value));
                prev = b.value;
            }
        }
    }
}
