//! Builtin benchmark environments and their on-disk configuration format.
//!
//! Four environments cover the regimes the certification machinery needs
//! exercised:
//!
//! * [`LinearGaussian`] — controllable scalar linear dynamics with
//!   Gaussian reset and transition noise, quadratic costs, optional
//!   per-stage cost clipping, and an optional per-rollout randomized
//!   control gain (plant-parameter uncertainty folded into the rollout
//!   distribution).
//! * [`CliffWalk1D`] — scalar dynamics with a large cost penalty past a
//!   threshold: a contact-like discontinuity that makes the cost
//!   distribution bimodal.
//! * [`BernoulliTask`] — a single binary constraint draw whose failure
//!   probability is a known affine function of the control, so acceptance
//!   curves can be checked against exact binomial theory.
//! * [`DirectDistribution`] — the total cost is drawn straight from a
//!   named distribution with closed-form measures (plus a location
//!   offset), for exact-truth coverage studies and shifted-truth
//!   sensitivity studies.
//!
//! Configurations live in TOML files with a `config_version` field and an
//! `[environment.<kind>]` table; unknown fields are rejected so typos
//! can't silently fall back to defaults.

use super::distributions::NamedDistribution;
use super::Environment;
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

fn require_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    require_finite(name, v)?;
    if v < 0.0 {
        return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
    }
    Ok(())
}

fn validate_clip(clip: &Option<(f64, f64)>) -> Result<()> {
    if let Some((lo, hi)) = clip {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::invalid(format!(
                "cost_clip needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// LinearGaussian
// ---------------------------------------------------------------------------

/// Scalar linear dynamics `x' = a x + gain * b u + noise_scale * w` with
/// `w ~ N(0, 1)`, Gaussian reset `x_0 ~ N(x0_mean, reset_noise_scale^2)`,
/// and quadratic costs `state_weight x^2 + control_weight u^2` per stage
/// plus `terminal_weight x_T^2`. When `gain_range` is set, each rollout
/// draws its control gain uniformly from that interval — simulator
/// parameter uncertainty folded into the sampled cost distribution. The
/// constraint is tube containment: `max_t |x_t| - state_limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearGaussian {
    pub horizon: usize,
    pub a: f64,
    pub b: f64,
    pub x0_mean: f64,
    pub reset_noise_scale: f64,
    pub noise_scale: f64,
    pub state_weight: f64,
    pub control_weight: f64,
    pub terminal_weight: f64,
    pub control_limit: f64,
    pub state_limit: f64,
    pub gain_range: Option<(f64, f64)>,
    pub cost_clip: Option<(f64, f64)>,
}

impl Default for LinearGaussian {
    fn default() -> Self {
        Self {
            horizon: 10,
            a: 1.0,
            b: 1.0,
            x0_mean: 0.0,
            reset_noise_scale: 0.1,
            noise_scale: 0.1,
            state_weight: 1.0,
            control_weight: 0.1,
            terminal_weight: 1.0,
            control_limit: 1.0,
            state_limit: 3.0,
            gain_range: None,
            cost_clip: None,
        }
    }
}

impl LinearGaussian {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("linear_gaussian horizon must be at least 1"));
        }
        require_finite("a", self.a)?;
        require_finite("b", self.b)?;
        require_finite("x0_mean", self.x0_mean)?;
        require_nonnegative("reset_noise_scale", self.reset_noise_scale)?;
        require_nonnegative("noise_scale", self.noise_scale)?;
        require_nonnegative("state_weight", self.state_weight)?;
        require_nonnegative("control_weight", self.control_weight)?;
        require_nonnegative("terminal_weight", self.terminal_weight)?;
        require_finite("state_limit", self.state_limit)?;
        if !self.control_limit.is_finite() || self.control_limit <= 0.0 {
            return Err(Error::invalid("control_limit must be positive"));
        }
        if let Some((lo, hi)) = self.gain_range {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::invalid(format!(
                    "gain_range needs finite lo <= hi, got [{lo}, {hi}]"
                )));
            }
        }
        validate_clip(&self.cost_clip)
    }
}

impl Environment for LinearGaussian {
    fn name(&self) -> &'static str {
        "linear_gaussian"
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn control_bounds(&self) -> (f64, f64) {
        (-self.control_limit, self.control_limit)
    }

    fn draw_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self.gain_range {
            Some((lo, hi)) => vec![rng.random_range(lo..=hi)],
            None => vec![1.0],
        }
    }

    fn sample_initial_state(&self, _params: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z: f64 = rng.sample(StandardNormal);
        vec![self.x0_mean + self.reset_noise_scale * z]
    }

    fn step(
        &self,
        params: &[f64],
        state: &[f64],
        control: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        let w: f64 = rng.sample(StandardNormal);
        vec![self.a * state[0] + params[0] * self.b * control[0] + self.noise_scale * w]
    }

    fn stage_cost(&self, _params: &[f64], _t: usize, state: &[f64], control: &[f64]) -> f64 {
        self.state_weight * state[0] * state[0] + self.control_weight * control[0] * control[0]
    }

    fn terminal_cost(&self, _params: &[f64], state: &[f64]) -> f64 {
        self.terminal_weight * state[0] * state[0]
    }

    fn constraint(&self, _params: &[f64], states: &[Vec<f64>], _controls: &[Vec<f64>]) -> f64 {
        let peak = states.iter().map(|x| x[0].abs()).fold(0.0, f64::max);
        peak - self.state_limit
    }

    fn cost_clip(&self) -> Option<(f64, f64)> {
        self.cost_clip
    }
}

// ---------------------------------------------------------------------------
// CliffWalk1D
// ---------------------------------------------------------------------------

/// Scalar walk `x' = x + step_gain u + noise_scale w` rewarded for sitting
/// near `target` but paying `penalty` per stage spent past the `cliff`
/// (with `target < cliff`): approaching the target raises the chance that
/// noise tips the trajectory over, so the cost distribution has a
/// discontinuous, bimodal shape. Constraint: `max_t x_t - cliff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliffWalk1D {
    pub horizon: usize,
    pub reset_noise_scale: f64,
    pub step_gain: f64,
    pub noise_scale: f64,
    pub cliff: f64,
    pub penalty: f64,
    pub target: f64,
    pub distance_weight: f64,
    pub effort_weight: f64,
    pub control_limit: f64,
    pub cost_clip: Option<(f64, f64)>,
}

impl Default for CliffWalk1D {
    fn default() -> Self {
        Self {
            horizon: 10,
            reset_noise_scale: 0.05,
            step_gain: 0.5,
            noise_scale: 0.2,
            cliff: 1.5,
            penalty: 5.0,
            target: 1.0,
            distance_weight: 0.5,
            effort_weight: 0.05,
            control_limit: 1.0,
            cost_clip: Some((0.0, 10.0)),
        }
    }
}

impl CliffWalk1D {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("cliff_walk_1d horizon must be at least 1"));
        }
        require_nonnegative("reset_noise_scale", self.reset_noise_scale)?;
        require_finite("step_gain", self.step_gain)?;
        require_nonnegative("noise_scale", self.noise_scale)?;
        require_finite("cliff", self.cliff)?;
        require_nonnegative("penalty", self.penalty)?;
        require_finite("target", self.target)?;
        require_nonnegative("distance_weight", self.distance_weight)?;
        require_nonnegative("effort_weight", self.effort_weight)?;
        if !self.control_limit.is_finite() || self.control_limit <= 0.0 {
            return Err(Error::invalid("control_limit must be positive"));
        }
        validate_clip(&self.cost_clip)
    }

    fn position_cost(&self, x: f64) -> f64 {
        let miss = x - self.target;
        let fell = if x > self.cliff { self.penalty } else { 0.0 };
        self.distance_weight * miss * miss + fell
    }
}

impl Environment for CliffWalk1D {
    fn name(&self) -> &'static str {
        "cliff_walk_1d"
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn control_bounds(&self) -> (f64, f64) {
        (-self.control_limit, self.control_limit)
    }

    fn draw_params(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        Vec::new()
    }

    fn sample_initial_state(&self, _params: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z: f64 = rng.sample(StandardNormal);
        vec![self.reset_noise_scale * z]
    }

    fn step(
        &self,
        _params: &[f64],
        state: &[f64],
        control: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        let w: f64 = rng.sample(StandardNormal);
        vec![state[0] + self.step_gain * control[0] + self.noise_scale * w]
    }

    fn stage_cost(&self, _params: &[f64], _t: usize, state: &[f64], control: &[f64]) -> f64 {
        self.position_cost(state[0]) + self.effort_weight * control[0] * control[0]
    }

    fn terminal_cost(&self, _params: &[f64], state: &[f64]) -> f64 {
        self.position_cost(state[0])
    }

    fn constraint(&self, _params: &[f64], states: &[Vec<f64>], _controls: &[Vec<f64>]) -> f64 {
        let peak = states.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
        peak - self.cliff
    }

    fn cost_clip(&self) -> Option<(f64, f64)> {
        self.cost_clip
    }
}

// ---------------------------------------------------------------------------
// BernoulliTask
// ---------------------------------------------------------------------------

/// One binary trial per rollout. The failure probability is the known
/// affine map `clamp(fail_base + sensitivity * u, 0, 1)` of the single
/// control, the total cost and the constraint value are both the failure
/// indicator, and everything downstream (acceptance curves, exact
/// coverage) can be checked against closed-form binomial expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BernoulliTask {
    pub fail_base: f64,
    pub sensitivity: f64,
}

impl Default for BernoulliTask {
    fn default() -> Self {
        Self { fail_base: 0.3, sensitivity: 1.0 }
    }
}

impl BernoulliTask {
    pub fn validate(&self) -> Result<()> {
        require_finite("fail_base", self.fail_base)?;
        if !(0.0..=1.0).contains(&self.fail_base) {
            return Err(Error::invalid(format!(
                "fail_base must lie in [0, 1], got {}",
                self.fail_base
            )));
        }
        require_finite("sensitivity", self.sensitivity)
    }

    /// Exact per-rollout failure probability under the constant control
    /// `theta`.
    pub fn failure_probability(&self, theta: f64) -> f64 {
        (self.fail_base + self.sensitivity * theta).clamp(0.0, 1.0)
    }

    /// Exact per-rollout success probability under the constant control
    /// `theta`.
    pub fn success_probability(&self, theta: f64) -> f64 {
        1.0 - self.failure_probability(theta)
    }

    /// The constant control realizing a given failure probability (the
    /// inverse of [`Self::failure_probability`] away from the clamp).
    pub fn control_for_failure_probability(&self, q: f64) -> f64 {
        (q - self.fail_base) / self.sensitivity
    }
}

impl Environment for BernoulliTask {
    fn name(&self) -> &'static str {
        "bernoulli_task"
    }

    fn horizon(&self) -> usize {
        1
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn control_bounds(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn draw_params(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        Vec::new()
    }

    fn sample_initial_state(&self, _params: &[f64], _rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![0.0]
    }

    fn step(
        &self,
        _params: &[f64],
        _state: &[f64],
        control: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        let failed = rng.random::<f64>() < self.failure_probability(control[0]);
        vec![if failed { 1.0 } else { 0.0 }]
    }

    fn stage_cost(&self, _params: &[f64], _t: usize, _state: &[f64], _control: &[f64]) -> f64 {
        0.0
    }

    fn terminal_cost(&self, _params: &[f64], state: &[f64]) -> f64 {
        state[0]
    }

    fn constraint(&self, _params: &[f64], states: &[Vec<f64>], _controls: &[Vec<f64>]) -> f64 {
        states.last().expect("trajectories are never empty")[0]
    }

    fn cost_upper_bound(&self) -> Option<f64> {
        Some(1.0)
    }

    fn constraint_upper_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

// ---------------------------------------------------------------------------
// DirectDistribution
// ---------------------------------------------------------------------------

/// Degenerate one-step environment whose total cost is a single draw from
/// `distribution`, shifted by `offset`. Controls are accepted and ignored.
/// Because the distribution's measures are closed-form, bounds computed on
/// sampled batches can be compared against exact truths; the offset swaps
/// in a location-shifted "true" distribution for sensitivity studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectDistribution {
    pub distribution: NamedDistribution,
    pub offset: f64,
}

impl Default for DirectDistribution {
    fn default() -> Self {
        Self { distribution: NamedDistribution::Uniform { lo: 0.0, hi: 1.0 }, offset: 0.0 }
    }
}

impl DirectDistribution {
    pub fn validate(&self) -> Result<()> {
        require_finite("offset", self.offset)?;
        self.distribution.validate()
    }

    /// Exact `tau`-quantile of the drawn cost.
    pub fn true_var(&self, tau: f64) -> Result<f64> {
        Ok(self.distribution.quantile(tau)? + self.offset)
    }

    /// Exact expected cost.
    pub fn true_mean(&self) -> f64 {
        self.distribution.mean() + self.offset
    }

    /// Exact CVaR of the drawn cost at tail level `tau`.
    pub fn true_cvar(&self, tau: f64) -> Result<f64> {
        Ok(self.distribution.cvar(tau)? + self.offset)
    }
}

impl Environment for DirectDistribution {
    fn name(&self) -> &'static str {
        "direct_distribution"
    }

    fn horizon(&self) -> usize {
        1
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn control_bounds(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn draw_params(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        Vec::new()
    }

    fn sample_initial_state(&self, _params: &[f64], _rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![0.0]
    }

    fn step(
        &self,
        _params: &[f64],
        _state: &[f64],
        _control: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        vec![self.distribution.sample(rng) + self.offset]
    }

    fn stage_cost(&self, _params: &[f64], _t: usize, _state: &[f64], _control: &[f64]) -> f64 {
        0.0
    }

    fn terminal_cost(&self, _params: &[f64], state: &[f64]) -> f64 {
        state[0]
    }

    fn constraint(&self, _params: &[f64], _states: &[Vec<f64>], _controls: &[Vec<f64>]) -> f64 {
        0.0
    }

    fn cost_upper_bound(&self) -> Option<f64> {
        Some(self.distribution.support().1 + self.offset)
    }

    fn constraint_upper_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

// ---------------------------------------------------------------------------
// Config files and the catalog
// ---------------------------------------------------------------------------

/// An environment choice, as written in config files:
/// `[environment.<kind>]` with the kind's fields inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    LinearGaussian(LinearGaussian),
    #[serde(rename = "cliff_walk_1d")]
    CliffWalk1D(CliffWalk1D),
    BernoulliTask(BernoulliTask),
    DirectDistribution(DirectDistribution),
}

impl EnvSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvSpec::LinearGaussian(e) => e.validate(),
            EnvSpec::CliffWalk1D(e) => e.validate(),
            EnvSpec::BernoulliTask(e) => e.validate(),
            EnvSpec::DirectDistribution(e) => e.validate(),
        }
    }

    /// The configured environment behind a uniform trait handle.
    pub fn as_env(&self) -> &dyn Environment {
        match self {
            EnvSpec::LinearGaussian(e) => e,
            EnvSpec::CliffWalk1D(e) => e,
            EnvSpec::BernoulliTask(e) => e,
            EnvSpec::DirectDistribution(e) => e,
        }
    }

    pub fn name(&self) -> &'static str {
        self.as_env().name()
    }
}

/// On-disk environment file: a version stamp plus the environment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvFile {
    pub config_version: u32,
    pub environment: EnvSpec,
}

/// Currently supported config file version.
pub const CONFIG_VERSION: u32 = 1;

/// Parses and validates an environment config from TOML text.
pub fn parse_env_file(text: &str) -> Result<EnvFile> {
    let file: EnvFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.config_version != CONFIG_VERSION {
        return Err(Error::Config(format!(
            "unsupported config_version {} (this build reads version {CONFIG_VERSION})",
            file.config_version
        )));
    }
    file.environment.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(file)
}

/// Reads an environment config file from disk.
pub fn load_env_file(path: &Path) -> Result<EnvFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_env_file(&text)
}

/// One catalog row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
}

/// The builtin environments, in catalog order.
pub fn builtin_environments() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "linear_gaussian",
            summary: "scalar linear dynamics, Gaussian reset/transition noise, quadratic costs, \
                      optional randomized control gain and cost clipping",
        },
        CatalogEntry {
            name: "cliff_walk_1d",
            summary: "scalar walk toward a target in front of a cliff; a large penalty past the \
                      threshold makes the cost distribution discontinuous",
        },
        CatalogEntry {
            name: "bernoulli_task",
            summary: "one binary trial with failure probability affine in the control; exact \
                      binomial theory for every downstream check",
        },
        CatalogEntry {
            name: "direct_distribution",
            summary: "total cost drawn directly from a named distribution (uniform, truncated \
                      normal, uniform mixture) with closed-form VaR/mean/CVaR",
        },
    ]
}

/// A builtin environment under its default configuration.
pub fn builtin(name: &str) -> Result<EnvSpec> {
    match name {
        "linear_gaussian" => Ok(EnvSpec::LinearGaussian(LinearGaussian::default())),
        "cliff_walk_1d" => Ok(EnvSpec::CliffWalk1D(CliffWalk1D::default())),
        "bernoulli_task" => Ok(EnvSpec::BernoulliTask(BernoulliTask::default())),
        "direct_distribution" => Ok(EnvSpec::DirectDistribution(DirectDistribution::default())),
        other => {
            let known: Vec<_> = builtin_environments().iter().map(|e| e.name).collect();
            Err(Error::invalid(format!(
                "unknown environment '{other}'; builtin environments are {}",
                known.join(", ")
            )))
        }
    }
}
