//! What happens to a certificate when the deployed distribution is not the
//! sampled one: sensitivity of the effective confidence under a bounded
//! one-sided shift, and hardened bounds that stay valid across the whole
//! shift budget.
//!
//! The shift model is a one-sided Kolmogorov–Smirnov budget: the sampled
//! (simulator) CDF may sit above the true CDF by at most `alpha` anywhere,
//! `sup_x CDF_sim(x) - CDF_true(x) <= alpha` — the simulator may be
//! optimistic about low costs by at most `alpha` of probability mass.
//!
//! Two dual viewpoints are provided. *Sensitivity* keeps the nominal bound
//! construction and reports the degraded error rate `delta_true` it really
//! achieves under a shift of size `alpha`. *Robust bounds* keep the target
//! error rate and pay for the shift in the construction itself: the
//! quantile bound moves to level `tau + alpha`, the staircase bounds widen
//! the band to `epsilon + alpha`, and the binomial limit shifts up by
//! exactly `alpha`.

use crate::bounds::{
    failure_prob_bound, staircase_bound, var_bound, var_k_index, BoundResult, RiskSpec,
};
use crate::error::{Error, Result};
use crate::stats::{binom_cdf_ext, dkw_gap, SampleBatch};
use serde::{Deserialize, Serialize};

fn require_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("shift budget alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sensitivity: degraded confidence of the nominal construction
// ---------------------------------------------------------------------------

/// Construction-specific numbers behind a sensitivity figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensitivityDetail {
    /// Quantile bound: the order-statistic index the nominal construction
    /// selects.
    Var { k_index: usize },
    /// Staircase (expectation/CVaR) bounds: the nominal band half-width.
    Band { epsilon: f64 },
    /// Binomial limit: the smallest failure count whose shifted acceptance
    /// already reaches the nominal error rate.
    FailureCount { k_alpha: u64 },
}

/// The error rate a nominal certificate actually achieves when the true
/// distribution sits up to `alpha` below the sampled one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    /// Degraded error rate: the certificate holds on the true distribution
    /// with probability at least `1 - delta_true`.
    pub delta_true: f64,
    /// The error rate the certificate was nominally built at.
    pub delta_sim: f64,
    pub alpha: f64,
    pub detail: SensitivityDetail,
}

/// Degraded error rate of the quantile bound: with `k*` the nominal index,
/// `delta_true = 1 - Bin(k* - 1; n, tau + alpha)`. Reaches 1 (no guarantee
/// left) once `tau + alpha >= 1`.
pub fn var_sensitivity(n: usize, tau: f64, delta_sim: f64, alpha: f64) -> Result<SensitivityResult> {
    RiskSpec::var(tau, delta_sim)?;
    require_alpha(alpha)?;
    let k = var_k_index(n, tau, delta_sim)?;
    let shifted = (tau + alpha).min(1.0);
    let delta_true = 1.0 - binom_cdf_ext(k as i64 - 1, n as u64, shifted)?;
    Ok(SensitivityResult {
        delta_true,
        delta_sim,
        alpha,
        detail: SensitivityDetail::Var { k_index: k },
    })
}

/// Degraded error rate of the staircase bounds (CVaR at any tail level,
/// and the expectation bound verbatim): `delta_true = exp(-2n (epsilon -
/// alpha)^2)` with `epsilon` the nominal band half-width. Only meaningful
/// while `alpha <= sqrt(-ln(2 delta_sim) / 2n)`; beyond that cap the
/// band-gap argument collapses and the call errors with the admissible
/// maximum.
pub fn cvar_sensitivity(n: usize, delta_sim: f64, alpha: f64) -> Result<SensitivityResult> {
    require_alpha(alpha)?;
    let epsilon = dkw_gap(delta_sim, n as u64)?;
    if alpha == 0.0 {
        // exp(-2n epsilon^2) is delta_sim by construction; return it
        // exactly rather than through the round trip.
        return Ok(SensitivityResult {
            delta_true: delta_sim,
            delta_sim,
            alpha,
            detail: SensitivityDetail::Band { epsilon },
        });
    }
    let max_alpha = (-(2.0 * delta_sim).ln() / (2.0 * n as f64)).max(0.0).sqrt();
    if alpha > max_alpha {
        return Err(Error::AlphaTooLarge { alpha, max_alpha });
    }
    let gap = epsilon - alpha;
    Ok(SensitivityResult {
        delta_true: (-2.0 * n as f64 * gap * gap).exp(),
        delta_sim,
        alpha,
        detail: SensitivityDetail::Band { epsilon },
    })
}

/// Degraded error rate of the binomial limit when the true per-trial
/// failure probability may exceed the sampled `q_sim` by up to `alpha`:
/// with `k*_alpha` the smallest count whose shifted CDF reaches
/// `delta_sim`, `delta_true = Bin(k*_alpha - 1; n, q_sim)`.
///
/// `q_sim` is the *known* simulator failure probability, so this is an
/// analysis tool for synthetic studies rather than a deployable
/// certificate (deployments never know `q_sim`).
pub fn failure_prob_sensitivity(
    n: u64,
    q_sim: f64,
    delta_sim: f64,
    alpha: f64,
) -> Result<SensitivityResult> {
    if n == 0 {
        return Err(Error::invalid("failure-probability sensitivity needs n >= 1 trials"));
    }
    if !q_sim.is_finite() || !(0.0..=1.0).contains(&q_sim) {
        return Err(Error::invalid(format!("q_sim must lie in [0, 1], got {q_sim}")));
    }
    require_alpha(alpha)?;
    if q_sim + alpha > 1.0 {
        return Err(Error::invalid(format!(
            "shifted failure probability q_sim + alpha = {} exceeds 1",
            q_sim + alpha
        )));
    }
    if !delta_sim.is_finite() || delta_sim <= 0.0 || delta_sim >= 1.0 {
        return Err(Error::invalid(format!("delta must lie strictly in (0, 1), got {delta_sim}")));
    }
    let shifted = q_sim + alpha;
    let mut k_alpha = n;
    for k in 0..=n {
        if binom_cdf_ext(k as i64, n, shifted)? >= delta_sim {
            k_alpha = k;
            break;
        }
    }
    let delta_true = binom_cdf_ext(k_alpha as i64 - 1, n, q_sim)?;
    Ok(SensitivityResult {
        delta_true,
        delta_sim,
        alpha,
        detail: SensitivityDetail::FailureCount { k_alpha },
    })
}

// ---------------------------------------------------------------------------
// Robust bounds: valid across the whole shift budget
// ---------------------------------------------------------------------------

/// Quantile bound that stays valid under any admissible shift: the nominal
/// bound computed at the inflated level `tau + alpha`. Errors with
/// [`Error::InvalidQuantile`] when `tau + alpha >= 1` — no finite-sample
/// quantile certificate survives a full-mass shift.
pub fn robust_var_bound(
    batch: &SampleBatch,
    tau: f64,
    delta: f64,
    alpha: f64,
) -> Result<BoundResult> {
    require_alpha(alpha)?;
    if tau + alpha >= 1.0 {
        return Err(Error::InvalidQuantile { tau, alpha });
    }
    var_bound(batch, tau + alpha, delta)
}

/// Staircase CVaR bound hardened against the shift budget: identical
/// construction with the band half-width inflated to `epsilon + alpha`.
/// Defaults to the almost-sure ceiling when the inflated band exceeds the
/// available tail mass (`epsilon + alpha > 1 - tau`).
pub fn robust_cvar_bound(
    batch: &SampleBatch,
    tau: f64,
    delta: f64,
    alpha: f64,
) -> Result<BoundResult> {
    let spec = RiskSpec::cvar(tau, delta)?;
    require_alpha(alpha)?;
    staircase_bound(batch, tau, delta, alpha, spec.measure)
}

/// The `tau = 0` case of [`robust_cvar_bound`]: the expectation bound with
/// band half-width `epsilon + alpha`.
pub fn robust_expectation_bound(batch: &SampleBatch, delta: f64, alpha: f64) -> Result<BoundResult> {
    let spec = RiskSpec::expectation(delta)?;
    require_alpha(alpha)?;
    staircase_bound(batch, 0.0, delta, alpha, spec.measure)
}

/// Binomial upper confidence limit hardened against the shift budget:
/// `max{q' in [0, 1] : Bin(k; n, q' - alpha) >= delta}`. Because shifting
/// the CDF argument by `alpha` translates the feasible set exactly, this
/// equals `min(nominal limit + alpha, 1)`.
pub fn robust_failure_prob_bound(
    failures: u64,
    n: u64,
    delta: f64,
    alpha: f64,
) -> Result<BoundResult> {
    require_alpha(alpha)?;
    let nominal = failure_prob_bound(failures, n, delta)?;
    Ok(BoundResult { value: (nominal.value + alpha).min(1.0), ..nominal })
}

// ---------------------------------------------------------------------------
// Empirical shift measurement
// ---------------------------------------------------------------------------

/// Plug-in one-sided Kolmogorov–Smirnov distance between two sample
/// batches: the largest amount by which the empirical CDF of `a` sits
/// above that of `b`, clamped at 0. A diagnostic for sizing shift budgets
/// from data — not itself a certificate.
pub fn one_sided_ks_distance(a: &SampleBatch, b: &SampleBatch) -> f64 {
    let av = a.values();
    let bv = b.values();
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < av.len() || j < bv.len() {
        let x = match (av.get(i), bv.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!("loop condition guarantees a remaining value"),
        };
        while i < av.len() && av[i] <= x {
            i += 1;
        }
        while j < bv.len() && bv[j] <= x {
            j += 1;
        }
        best = best.max(i as f64 / av.len() as f64 - j as f64 / bv.len() as f64);
    }
    best
}
