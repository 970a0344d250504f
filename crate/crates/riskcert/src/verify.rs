//! Constraint-satisfaction tests with a guaranteed false-acceptance rate,
//! and selection among candidate policies with family-wise confidence
//! control.
//!
//! A test compares a one-sided risk certificate against a cutoff and
//! accepts only when the certified value is at or under it. Because the
//! certificate exceeds the true measure with probability at least
//! `1 - delta`, a policy whose true measure violates the cutoff is
//! accepted with probability at most `delta`.
//!
//! Chance constraints (`Pr[g <= 0] >= tau`) can be tested through two
//! routes that always reach the same verdict: bounding the `tau`-quantile
//! of the constraint value and comparing it against zero, or counting
//! violations and comparing the exact binomial upper confidence limit
//! against `1 - tau`. The agreement is an algebraic identity — the count
//! threshold of the second route is exactly `n` minus the order-statistic
//! index of the first.
//!
//! When one certificate is selected among `m` (picking the policy with the
//! lowest bound), the failure events compound. Selection therefore
//! recomputes every per-policy bound at an inflated budget: `delta / m`
//! (union bound, always valid) or `1 - (1 - delta)^(1/m)` (tighter, valid
//! when the per-policy batches are mutually independent).

use crate::bounds::{
    cvar_bound, expectation_bound, failure_prob_bound, var_bound, BoundResult, Measure, RiskSpec,
};
use crate::error::{Error, Result};
use crate::stats::{binom_cdf_ext, SampleBatch};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Bound dispatch
// ---------------------------------------------------------------------------

/// Computes the certificate a [`RiskSpec`] asks for on one batch. For the
/// failure-probability measure the batch is read as constraint values and
/// every strictly positive entry counts as a failure.
pub fn bound_for_spec(batch: &SampleBatch, spec: &RiskSpec) -> Result<BoundResult> {
    match spec.measure {
        Measure::ValueAtRisk => var_bound(batch, spec.tau, spec.delta),
        Measure::Expectation => expectation_bound(batch, spec.delta),
        Measure::Cvar => cvar_bound(batch, spec.tau, spec.delta),
        Measure::FailureProbability => {
            failure_prob_bound(batch.count_above(0.0) as u64, batch.n() as u64, spec.delta)
        }
    }
}

// ---------------------------------------------------------------------------
// Constraint tests
// ---------------------------------------------------------------------------

/// Which certificate a chance constraint `Pr[g <= 0] >= tau` is tested
/// through. Both routes reach identical verdicts on the same samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChanceRoute {
    /// Bound the `tau`-quantile of the constraint values; accept when the
    /// selected order statistic is at most zero.
    ViaVarOrderStatistic,
    /// Count strictly positive constraint values as failures; accept when
    /// the exact binomial upper confidence limit is at most `1 - tau`.
    ViaFailureProbability,
}

/// A threshold test: certificate specification, the cutoff it is compared
/// against, and — when the test encodes a chance constraint — the route it
/// was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub measure: RiskSpec,
    pub cutoff: f64,
    pub route: Option<ChanceRoute>,
}

impl ConstraintSpec {
    /// Plain threshold test on any measure: accept when the certified
    /// value is at most `cutoff`.
    pub fn new(measure: RiskSpec, cutoff: f64) -> Result<Self> {
        if !cutoff.is_finite() {
            return Err(Error::invalid(format!("constraint cutoff must be finite, got {cutoff}")));
        }
        Ok(Self { measure, cutoff, route: None })
    }

    /// Chance-constraint test `Pr[g <= 0] >= tau` at false-acceptance rate
    /// `delta`, expressed through the chosen route: the quantile route
    /// compares a value-at-risk certificate on `g` against 0, the count
    /// route compares a failure-probability certificate against `1 - tau`.
    pub fn chance(tau: f64, delta: f64, route: ChanceRoute) -> Result<Self> {
        let (measure, cutoff) = match route {
            ChanceRoute::ViaVarOrderStatistic => (RiskSpec::var(tau, delta)?, 0.0),
            ChanceRoute::ViaFailureProbability => {
                // Validates tau through the quantile constructor even
                // though the stored spec only keeps delta.
                RiskSpec::var(tau, delta)?;
                (RiskSpec::failure_probability(delta)?, 1.0 - tau)
            }
        };
        Ok(Self { measure, cutoff, route: Some(route) })
    }
}

/// Input to [`constraint_test`]: either scalar samples (costs or constraint
/// values) or a pre-counted failure tally.
#[derive(Debug, Clone, Copy)]
pub enum TestInput<'a> {
    Batch(&'a SampleBatch),
    Failures { failures: u64, trials: u64 },
}

/// Verdict of a threshold test together with the certificate it rests on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub accepted: bool,
    pub bound: BoundResult,
    pub cutoff: f64,
    /// Probability of accepting a policy whose true measure violates the
    /// cutoff: the `delta` the certificate was built at.
    pub guaranteed_false_accept_rate: f64,
}

/// Runs a threshold test: computes the specified certificate and accepts
/// exactly when its value is at most the cutoff. An infeasible bound
/// propagates as an error — it is a refusal to decide, never an
/// acceptance.
pub fn constraint_test(input: TestInput<'_>, spec: &ConstraintSpec) -> Result<TestOutcome> {
    let bound = match (input, spec.measure.measure) {
        (TestInput::Batch(batch), _) => bound_for_spec(batch, &spec.measure)?,
        (TestInput::Failures { failures, trials }, Measure::FailureProbability) => {
            failure_prob_bound(failures, trials, spec.measure.delta)?
        }
        (TestInput::Failures { .. }, other) => {
            return Err(Error::invalid(format!(
                "a failure tally can only feed a failure-probability test, not {}",
                other.name()
            )));
        }
    };
    Ok(TestOutcome {
        accepted: bound.value <= spec.cutoff,
        bound,
        cutoff: spec.cutoff,
        guaranteed_false_accept_rate: spec.measure.delta,
    })
}

/// Runs both chance-constraint routes on the same constraint-value batch
/// and reports whether their verdicts agree (they always should; this is
/// the entry point property tests drive). The batch must be binary for the
/// count route's failure tally to mean what the quantile route sees.
pub fn chance_constraint_routes_agree(
    g_samples: &SampleBatch,
    tau: f64,
    delta: f64,
) -> Result<bool> {
    if g_samples.values().iter().any(|&g| g != 0.0 && g != 1.0) {
        return Err(Error::invalid("route comparison expects binary constraint values in {0, 1}"));
    }
    let via_var = constraint_test(
        TestInput::Batch(g_samples),
        &ConstraintSpec::chance(tau, delta, ChanceRoute::ViaVarOrderStatistic)?,
    )?;
    let via_count = constraint_test(
        TestInput::Batch(g_samples),
        &ConstraintSpec::chance(tau, delta, ChanceRoute::ViaFailureProbability)?,
    )?;
    Ok(via_var.accepted == via_count.accepted)
}

// ---------------------------------------------------------------------------
// Theoretical acceptance curve of the count route
// ---------------------------------------------------------------------------

/// Largest failure count the count route accepts at: `max{k : Bin(k; n,
/// 1-tau) <= delta}`, or `None` when even zero failures are rejected.
/// Equals `n - k*` where `k*` is the quantile route's order-statistic
/// index, which is why the two routes always agree.
pub fn acceptance_threshold(n: u64, tau: f64, delta: f64) -> Result<Option<u64>> {
    RiskSpec::var(tau, delta)?;
    let mut accepted = None;
    for k in 0..=n {
        if binom_cdf_ext(k as i64, n, 1.0 - tau)? <= delta {
            accepted = Some(k);
        } else {
            break;
        }
    }
    Ok(accepted)
}

/// Exact probability that the count route accepts a policy whose per-trial
/// success probability is `p`: `Bin(k_max; n, 1-p)`, or 0 when no count is
/// accepted. For every violating `p < tau` this is at most `delta` — the
/// false-acceptance guarantee in closed form.
pub fn theoretical_acceptance_prob(n: u64, tau: f64, delta: f64, p: f64) -> Result<f64> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("success probability must lie in [0, 1], got {p}")));
    }
    match acceptance_threshold(n, tau, delta)? {
        Some(k_max) => binom_cdf_ext(k_max as i64, n, 1.0 - p),
        None => Ok(0.0),
    }
}

// ---------------------------------------------------------------------------
// Multiple-testing corrections and policy selection
// ---------------------------------------------------------------------------

/// How the per-policy failure budget is inflated when `m` bounds are
/// computed and the smallest is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// `1 - (1 - delta)^(1/m)`: exact family-wise control when the
    /// per-policy batches are mutually independent.
    Sidak,
    /// `delta / m`: the union bound; valid without independence, slightly
    /// wider.
    Bonferroni,
    /// No inflation. The reported bound holds per policy only; the chance
    /// that all `m` hold simultaneously decays like `(1 - delta)^m`.
    None,
}

impl Correction {
    pub fn name(&self) -> &'static str {
        match self {
            Correction::Sidak => "sidak",
            Correction::Bonferroni => "bonferroni",
            Correction::None => "none",
        }
    }
}

/// Per-policy failure budget after correcting for a family of `m` bounds.
/// Always at most `delta`, with equality at `m = 1`.
pub fn inflate_delta(delta: f64, m: usize, correction: Correction) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::invalid(format!("delta must lie strictly in (0, 1), got {delta}")));
    }
    if m == 0 {
        return Err(Error::invalid("correction needs at least one hypothesis"));
    }
    if m == 1 {
        return Ok(delta);
    }
    Ok(match correction {
        // 1 - (1 - delta)^(1/m), evaluated through ln_1p/exp_m1 so small
        // deltas keep full precision.
        Correction::Sidak => -((-delta).ln_1p() / m as f64).exp_m1(),
        Correction::Bonferroni => delta / m as f64,
        Correction::None => delta,
    })
}

/// Outcome of lowest-bound policy selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Certificates recomputed at the inflated budget, one per policy in
    /// input order.
    pub per_policy_bounds: Vec<BoundResult>,
    /// The family-wise budget the caller asked for.
    pub delta: f64,
    /// The per-policy budget each bound was actually built at.
    pub inflated_delta: f64,
    pub correction: Correction,
    /// Index of the policy with the smallest bound (ties go to the lowest
    /// index).
    pub chosen_index: usize,
    pub chosen_bound: f64,
    /// Confidence that the chosen bound covers the chosen policy's true
    /// measure: guaranteed for `sidak` (under batch independence) and
    /// `bonferroni`; for `none` this is merely the independent-case value
    /// `(1 - delta)^m`, which collapses as `m` grows.
    pub joint_confidence: f64,
}

/// Computes every policy's certificate at the corrected budget and picks
/// the smallest. Each batch must come from that policy's own fresh
/// rollouts; the Šidák correction additionally needs the batches mutually
/// independent (disjoint seed ranges).
///
/// Any per-policy failure aborts selection naming the offending policy. A
/// bound that defaulted to the almost-sure ceiling also aborts unless
/// `allow_defaulted` is set — such a certificate is valid but says nothing,
/// and silently selecting on it would hide that the sample budget was too
/// small for the requested measure.
pub fn select_policy(
    batches: &[SampleBatch],
    spec: &RiskSpec,
    correction: Correction,
    allow_defaulted: bool,
) -> Result<SelectionReport> {
    if batches.is_empty() {
        return Err(Error::invalid("policy selection needs at least one batch"));
    }
    let m = batches.len();
    let inflated = inflate_delta(spec.delta, m, correction)?;
    let per_policy = spec.with_delta(inflated)?;

    let mut bounds = Vec::with_capacity(m);
    for (index, batch) in batches.iter().enumerate() {
        let bound = bound_for_spec(batch, &per_policy)
            .map_err(|source| Error::PolicyBound { index, source: Box::new(source) })?;
        if bound.defaulted && !allow_defaulted {
            return Err(Error::DefaultedBound { index });
        }
        bounds.push(bound);
    }

    let mut chosen_index = 0;
    for (index, bound) in bounds.iter().enumerate() {
        if bound.value < bounds[chosen_index].value {
            chosen_index = index;
        }
    }
    let joint_confidence = match correction {
        Correction::Sidak | Correction::Bonferroni => 1.0 - spec.delta,
        Correction::None => (1.0 - spec.delta).powi(m as i32),
    };
    Ok(SelectionReport {
        chosen_bound: bounds[chosen_index].value,
        per_policy_bounds: bounds,
        delta: spec.delta,
        inflated_delta: inflated,
        correction,
        chosen_index,
        joint_confidence,
    })
}
