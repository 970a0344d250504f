//! Open-loop plan synthesis.
//!
//! Two generators of candidate policies for certification studies:
//!
//! * [`cem_optimize`] — cross-entropy search over open-loop plans. Each
//!   generation samples plans from per-step independent Gaussians clamped
//!   to the control bounds, scores them by averaged rollout cost, and
//!   refits the proposal to the lowest-cost elites. Deterministic in the
//!   seed: candidate draws and evaluation seeds are derived by index, so
//!   thread scheduling never changes the result.
//! * [`random_policies`] — plans drawn uniformly within the control
//!   bounds, the no-optimizer baseline and the raw material for
//!   select-then-certify studies.
//!
//! Candidates within a generation are scored under shared evaluation
//! seeds (common random numbers), so in noisy environments the elite
//! ranking reflects plan quality rather than luck of the noise draw.

use crate::error::{Error, Result};
use crate::sim::rng::{
    derive_seed, derive_stream, DOMAIN_CEM_EVAL, DOMAIN_CEM_SAMPLE, DOMAIN_RANDOM_POLICY,
};
use crate::sim::{rollout, Environment, Policy};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Proposal standard deviations never shrink below this, so search keeps
/// a minimal exploration floor even after the elites collapse.
const STD_FLOOR: f64 = 1e-3;

/// Cross-entropy search settings. The plan length always comes from the
/// environment horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CemConfig {
    /// Number of sample-score-refit rounds.
    pub generations: usize,
    /// Candidate plans per generation.
    pub population: usize,
    /// Lowest-cost candidates the proposal is refit to.
    pub elites: usize,
    /// Rollouts averaged per candidate score.
    pub evaluations_per_candidate: usize,
    /// Initial proposal mean for every control entry.
    pub init_mean: f64,
    /// Initial proposal standard deviation for every control entry.
    pub init_std: f64,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            generations: 10,
            population: 100,
            elites: 10,
            evaluations_per_candidate: 1,
            init_mean: 0.0,
            init_std: 1.0,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::invalid("generations must be at least 1"));
        }
        if self.population == 0 {
            return Err(Error::invalid("population must be at least 1"));
        }
        if self.elites == 0 || self.elites > self.population {
            return Err(Error::invalid(format!(
                "elites must lie in 1..=population, got {} of {}",
                self.elites, self.population
            )));
        }
        if self.evaluations_per_candidate == 0 {
            return Err(Error::invalid("evaluations_per_candidate must be at least 1"));
        }
        if !self.init_mean.is_finite() {
            return Err(Error::invalid("init_mean must be finite"));
        }
        if !self.init_std.is_finite() || self.init_std <= 0.0 {
            return Err(Error::invalid("init_std must be positive"));
        }
        Ok(())
    }
}

/// Search diagnostics for one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CemGeneration {
    /// Zero-based generation index.
    pub generation: usize,
    /// Lowest candidate score this generation.
    pub best_cost: f64,
    /// Middle candidate score this generation (upper median).
    pub median_cost: f64,
    /// Score of the worst candidate still admitted to the elite set.
    pub elite_threshold: f64,
    /// Average proposal standard deviation after the refit.
    pub mean_std: f64,
}

/// The synthesized plan and the search trace behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CemResult {
    /// Best-scoring plan observed across all generations.
    pub plan: Vec<Vec<f64>>,
    /// Its averaged rollout cost.
    pub best_cost: f64,
    /// Per-generation diagnostics, one row per generation.
    pub trace: Vec<CemGeneration>,
}

fn sample_plan(
    mean: &[Vec<f64>],
    std: &[Vec<f64>],
    lo: f64,
    hi: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    mean.iter()
        .zip(std)
        .map(|(m_t, s_t)| {
            m_t.iter()
                .zip(s_t)
                .map(|(&m, &s)| {
                    let z: f64 = rng.sample(StandardNormal);
                    (m + s * z).clamp(lo, hi)
                })
                .collect()
        })
        .collect()
}

/// Synthesizes an open-loop plan for `env` by cross-entropy search.
///
/// Returns the best plan observed across all generations together with
/// its score and the per-generation trace. Identical `(env, config,
/// seed)` triples produce identical results.
pub fn cem_optimize(env: &dyn Environment, config: &CemConfig, seed: u64) -> Result<CemResult> {
    config.validate()?;
    let horizon = env.horizon();
    let dim = env.control_dim();
    let (lo, hi) = env.control_bounds();
    let evals = config.evaluations_per_candidate;

    let mut mean = vec![vec![config.init_mean.clamp(lo, hi); dim]; horizon];
    let mut std = vec![vec![config.init_std; dim]; horizon];
    let mut best_plan: Option<Vec<Vec<f64>>> = None;
    let mut best_cost = f64::INFINITY;
    let mut trace = Vec::with_capacity(config.generations);

    for g in 0..config.generations {
        // Shared evaluation seeds: every candidate this generation faces
        // the same noise realizations.
        let eval_seeds: Vec<u64> = (0..evals)
            .map(|j| derive_seed(seed, DOMAIN_CEM_EVAL, (g * evals + j) as u64))
            .collect();

        let mut scored: Vec<(f64, Vec<Vec<f64>>)> = (0..config.population)
            .into_par_iter()
            .map(|i| {
                let mut rng =
                    derive_stream(seed, DOMAIN_CEM_SAMPLE, (g * config.population + i) as u64);
                let plan = sample_plan(&mean, &std, lo, hi, &mut rng);
                let policy = Policy::open_loop(plan.clone());
                let mut total = 0.0;
                for &eval_seed in &eval_seeds {
                    total += rollout(env, &policy, eval_seed, false)?.total_cost;
                }
                Ok((total / evals as f64, plan))
            })
            .collect::<Result<_>>()?;

        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let gen_best = scored[0].0;
        let median_cost = scored[config.population / 2].0;
        let elite_threshold = scored[config.elites - 1].0;
        if gen_best < best_cost {
            best_cost = gen_best;
            best_plan = Some(scored[0].1.clone());
        }

        let elite_count = config.elites as f64;
        let mut std_sum = 0.0;
        for t in 0..horizon {
            for d in 0..dim {
                let m = scored[..config.elites].iter().map(|(_, p)| p[t][d]).sum::<f64>()
                    / elite_count;
                let var = scored[..config.elites]
                    .iter()
                    .map(|(_, p)| (p[t][d] - m) * (p[t][d] - m))
                    .sum::<f64>()
                    / elite_count;
                mean[t][d] = m;
                std[t][d] = var.sqrt().max(STD_FLOOR);
                std_sum += std[t][d];
            }
        }

        trace.push(CemGeneration {
            generation: g,
            best_cost: gen_best,
            median_cost,
            elite_threshold,
            mean_std: std_sum / (horizon * dim) as f64,
        });
    }

    Ok(CemResult {
        plan: best_plan.expect("at least one generation ran"),
        best_cost,
        trace,
    })
}

/// Draws `count` open-loop plans uniformly within the control bounds —
/// the candidate pool for select-then-certify studies. Policy `i` depends
/// only on `(seed, i)`.
pub fn random_policies(env: &dyn Environment, count: usize, seed: u64) -> Vec<Policy> {
    let horizon = env.horizon();
    let dim = env.control_dim();
    let (lo, hi) = env.control_bounds();
    (0..count)
        .map(|i| {
            let mut rng = derive_stream(seed, DOMAIN_RANDOM_POLICY, i as u64);
            let plan = (0..horizon)
                .map(|_| (0..dim).map(|_| rng.random_range(lo..=hi)).collect())
                .collect();
            Policy::open_loop(plan)
        })
        .collect()
}
