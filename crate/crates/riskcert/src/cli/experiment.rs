//! Config-driven experiments: bound-coverage validation, shift
//! sensitivity, and robust-bound sweeps.
//!
//! An experiment file is TOML with a `config_version`, an environment
//! (inline table or file reference), a policy source, a measure, sampling
//! sizes, and — for the sweep experiments — a list of `(offset, alpha)`
//! cases. Relative paths inside the config resolve against the config
//! file's directory.
//!
//! Seeding is hierarchical: the master seed derives one stream index per
//! purpose (reference batch, each realization, policy synthesis, each
//! sweep case), so rerunning any experiment with the same config and seed
//! reproduces every output byte for byte, and no realization shares
//! rollout seeds with the reference.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::bounds::{BoundResult, Measure, RiskSpec};
use crate::cli::hist::Histogram;
use crate::cli::report::{
    ExperimentHeader, RobustCase, RobustSummary, SensitivityCase, SensitivitySummary,
    ValidateSummary, ROBUST_SCHEMA, SENSITIVITY_SCHEMA, VALIDATE_SCHEMA,
};
use crate::cli::svg::{histogram_overlay_svg, line_chart_svg};
use crate::cli::tables::{fmt_f64, fmt_opt, write_csv};
use crate::error::{Error, Result};
use crate::shift::{
    cvar_sensitivity, failure_prob_sensitivity, robust_cvar_bound, robust_expectation_bound,
    robust_failure_prob_bound, robust_var_bound, var_sensitivity,
};
use crate::sim::rng::{
    derive_seed, DOMAIN_EXPERIMENT, DOMAIN_EXPERIMENT_CASE, DOMAIN_EXPERIMENT_POLICY,
};
use crate::sim::{
    load_env_file, sample_batch, load_plan, EnvSpec, Policy, RecordKind,
};
use crate::stats::SampleBatch;
use crate::synth::{cem_optimize, random_policies, CemConfig};
use crate::verify::bound_for_spec;

/// Currently supported experiment config version.
pub const CONFIG_VERSION: u32 = 1;

fn default_reference_rollouts() -> usize {
    10_000
}

fn default_bins() -> usize {
    40
}

fn default_record() -> RecordKind {
    RecordKind::Cost
}

/// Where the evaluated policy comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySource {
    /// The all-zero open-loop plan.
    Zero,
    /// An open-loop plan loaded from `policy.file`.
    File,
    /// A plan synthesized by cross-entropy search (`policy.cem` overrides
    /// the search defaults).
    Cem,
    /// The first uniformly random plan under the derived policy seed.
    Random,
}

impl PolicySource {
    pub fn name(self) -> &'static str {
        match self {
            PolicySource::Zero => "zero",
            PolicySource::File => "file",
            PolicySource::Cem => "cem",
            PolicySource::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub source: PolicySource,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub cem: Option<CemConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    /// One of `var`, `expectation` (alias `mean`), `cvar`,
    /// `failure_probability` (alias `failprob`).
    pub kind: String,
    #[serde(default)]
    pub tau: Option<f64>,
    pub delta: f64,
}

/// One sweep cell: the true distribution is the configured environment
/// with `offset` applied to its shift parameter, and certificates are
/// hardened against (robust) or graded at (sensitivity) budget `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCase {
    pub offset: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub config_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Samples per bound construction.
    pub n: usize,
    /// Repeated bound constructions.
    pub realizations: usize,
    /// Size of the Monte Carlo reference batch behind the truth estimate.
    #[serde(default = "default_reference_rollouts")]
    pub reference_rollouts: usize,
    #[serde(default = "default_record")]
    pub record: RecordKind,
    /// Histogram bins in the validation outputs.
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Emit SVG quick-look plots next to the CSVs.
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub environment: Option<EnvSpec>,
    /// Environment config file, alternative to the inline table.
    #[serde(default)]
    pub environment_file: Option<PathBuf>,
    pub policy: PolicyConfig,
    pub measure: MeasureConfig,
    #[serde(default)]
    pub sweep: Vec<SweepCase>,
}

/// Maps a measure name (config files and docs) to the measure.
pub fn measure_from_name(name: &str) -> Result<Measure> {
    match name {
        "var" => Ok(Measure::ValueAtRisk),
        "expectation" | "mean" => Ok(Measure::Expectation),
        "cvar" => Ok(Measure::Cvar),
        "failure_probability" | "failprob" => Ok(Measure::FailureProbability),
        other => Err(Error::invalid(format!(
            "unknown measure '{other}'; use var, expectation, cvar, or failure_probability"
        ))),
    }
}

/// Builds a validated measure spec from user-facing pieces, rejecting a
/// `tau` on measures that take none.
pub fn build_spec(measure: Measure, tau: Option<f64>, delta: f64) -> Result<RiskSpec> {
    match measure {
        Measure::ValueAtRisk => {
            let tau = tau.ok_or_else(|| Error::invalid("var needs a tau"))?;
            RiskSpec::var(tau, delta)
        }
        Measure::Cvar => {
            let tau = tau.ok_or_else(|| Error::invalid("cvar needs a tau"))?;
            RiskSpec::cvar(tau, delta)
        }
        Measure::Expectation => {
            if tau.is_some() {
                return Err(Error::invalid("expectation takes no tau"));
            }
            RiskSpec::expectation(delta)
        }
        Measure::FailureProbability => {
            if tau.is_some() {
                return Err(Error::invalid("failure_probability takes no tau"));
            }
            RiskSpec::failure_probability(delta)
        }
    }
}

/// A fully resolved experiment, ready to run.
pub struct Experiment {
    pub env: EnvSpec,
    pub policy: Policy,
    pub policy_source: PolicySource,
    pub spec: RiskSpec,
    /// `tau` as it appears in reports: absent for measures without one.
    pub tau: Option<f64>,
    pub record: RecordKind,
    pub n: usize,
    pub realizations: usize,
    pub reference_rollouts: usize,
    pub bins: usize,
    pub svg: bool,
    pub seed: u64,
    pub sweep: Vec<SweepCase>,
    pub out_dir: PathBuf,
}

/// Parses an experiment config from TOML text.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if config.config_version != CONFIG_VERSION {
        return Err(Error::Config(format!(
            "unsupported config_version {} (this build reads version {CONFIG_VERSION})",
            config.config_version
        )));
    }
    Ok(config)
}

fn resolve_path(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Loads, validates, and resolves an experiment config file. `cli_out_dir`
/// overrides the config's `output_dir`; one of the two must be present.
pub fn load_experiment(config_path: &Path, cli_out_dir: Option<PathBuf>) -> Result<Experiment> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let config = parse_experiment_config(&text)?;
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));

    let env = match (&config.environment, &config.environment_file) {
        (Some(env), None) => env.clone(),
        (None, Some(file)) => load_env_file(&resolve_path(base, file))?.environment,
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either an inline [environment.*] table or environment_file, not both".into(),
            ));
        }
        (None, None) => {
            return Err(Error::Config(
                "an experiment needs an [environment.*] table or an environment_file".into(),
            ));
        }
    };
    env.validate().map_err(|e| Error::Config(e.to_string()))?;

    if config.n == 0 || config.realizations == 0 || config.reference_rollouts == 0 {
        return Err(Error::Config(
            "n, realizations, and reference_rollouts must all be at least 1".into(),
        ));
    }
    if config.bins == 0 {
        return Err(Error::Config("bins must be at least 1".into()));
    }

    let measure = measure_from_name(&config.measure.kind).map_err(|e| Error::Config(e.to_string()))?;
    let spec = build_spec(measure, config.measure.tau, config.measure.delta)
        .map_err(|e| Error::Config(e.to_string()))?;

    for case in &config.sweep {
        if !case.offset.is_finite() || !case.alpha.is_finite() || case.alpha < 0.0 {
            return Err(Error::Config(format!(
                "sweep cases need finite offset and nonnegative alpha, got offset {} alpha {}",
                case.offset, case.alpha
            )));
        }
    }

    let policy_seed = derive_seed(config.seed, DOMAIN_EXPERIMENT_POLICY, 0);
    let horizon = env.as_env().horizon();
    let dim = env.as_env().control_dim();
    let policy = match config.policy.source {
        PolicySource::Zero => Policy::zero(horizon, dim),
        PolicySource::File => {
            let file = config.policy.file.as_ref().ok_or_else(|| {
                Error::Config("policy.source = \"file\" needs policy.file".into())
            })?;
            let plan = load_plan(&resolve_path(base, file))?;
            if plan.len() != horizon {
                return Err(Error::HorizonMismatch { policy: plan.len(), environment: horizon });
            }
            Policy::open_loop(plan)
        }
        PolicySource::Cem => {
            let cem = config.policy.cem.clone().unwrap_or_default();
            Policy::open_loop(cem_optimize(env.as_env(), &cem, policy_seed)?.plan)
        }
        PolicySource::Random => random_policies(env.as_env(), 1, policy_seed)
            .pop()
            .expect("one random policy requested"),
    };
    if config.policy.source != PolicySource::File && config.policy.file.is_some() {
        return Err(Error::Config("policy.file is only read when policy.source = \"file\"".into()));
    }
    if config.policy.source != PolicySource::Cem && config.policy.cem.is_some() {
        return Err(Error::Config("policy.cem is only read when policy.source = \"cem\"".into()));
    }

    let out_dir = match cli_out_dir.or_else(|| config.output_dir.as_ref().map(|d| resolve_path(base, d))) {
        Some(dir) => dir,
        None => {
            return Err(Error::Config(
                "give an output directory: --out-dir on the command line or output_dir in the config"
                    .into(),
            ));
        }
    };

    Ok(Experiment {
        env,
        policy,
        policy_source: config.policy.source,
        spec,
        tau: match measure {
            Measure::ValueAtRisk | Measure::Cvar => config.measure.tau,
            _ => None,
        },
        record: config.record,
        n: config.n,
        realizations: config.realizations,
        reference_rollouts: config.reference_rollouts,
        bins: config.bins,
        svg: config.svg,
        seed: config.seed,
        sweep: config.sweep,
        out_dir,
    })
}

impl Experiment {
    fn header(&self) -> ExperimentHeader {
        ExperimentHeader {
            environment: self.env.name(),
            policy_source: self.policy_source.name(),
            measure: self.spec.measure.name(),
            tau: self.tau,
            delta: self.spec.delta,
            n: self.n,
            realizations: self.realizations,
            reference_rollouts: self.reference_rollouts,
            record: self.record.name(),
            seed: self.seed,
        }
    }

    /// Reference batch under the given environment and case seed.
    fn reference(&self, env: &EnvSpec, case_seed: u64) -> Result<SampleBatch> {
        let base = derive_seed(case_seed, DOMAIN_EXPERIMENT, 0);
        sample_batch(env.as_env(), &self.policy, self.reference_rollouts, base, self.record)
    }

    /// One realization's sample batch under the simulator environment.
    fn realization_batch(&self, case_seed: u64, r: usize) -> Result<SampleBatch> {
        let base = derive_seed(case_seed, DOMAIN_EXPERIMENT, 1 + r as u64);
        sample_batch(self.env.as_env(), &self.policy, self.n, base, self.record)
    }
}

/// Monte Carlo estimate of the configured measure from a reference batch.
///
/// VaR uses the empirical quantile `J_(ceil(tau n))`; CVaR uses the
/// standard tail-average estimator `qhat + mean((J - qhat)^+) / (1 - tau)`
/// around that quantile; the failure probability is the fraction of
/// positive values.
pub fn truth_estimate(batch: &SampleBatch, spec: &RiskSpec) -> Result<f64> {
    let n = batch.n();
    let nf = n as f64;
    match spec.measure {
        Measure::ValueAtRisk => {
            let k = ((spec.tau * nf).ceil() as usize).clamp(1, n);
            batch.order_statistic(k)
        }
        Measure::Expectation => Ok(batch.values().iter().sum::<f64>() / nf),
        Measure::Cvar => {
            let k = ((spec.tau * nf).ceil() as usize).clamp(1, n);
            let qhat = batch.order_statistic(k)?;
            let excess: f64 = batch.values().iter().map(|&v| (v - qhat).max(0.0)).sum();
            Ok(qhat + excess / (nf * (1.0 - spec.tau)))
        }
        Measure::FailureProbability => Ok(batch.count_above(0.0) as f64 / nf),
    }
}

/// The environment with its shift parameter moved by `offset`: the cost
/// location for distribution-backed environments, the failure rate for
/// the binary-trial environment.
fn apply_offset(env: &EnvSpec, offset: f64) -> Result<EnvSpec> {
    match env {
        EnvSpec::DirectDistribution(d) => {
            let mut shifted = d.clone();
            shifted.offset += offset;
            Ok(EnvSpec::DirectDistribution(shifted))
        }
        EnvSpec::BernoulliTask(b) => {
            let mut shifted = b.clone();
            shifted.fail_base += offset;
            shifted.validate().map_err(|e| {
                Error::Config(format!("offset {offset} leaves the environment invalid: {e}"))
            })?;
            Ok(EnvSpec::BernoulliTask(shifted))
        }
        other => Err(Error::Config(format!(
            "environment '{}' has no shift parameter; sweep experiments support \
             direct_distribution (cost location) and bernoulli_task (failure rate)",
            other.name()
        ))),
    }
}

/// The simulator failure probability implied by the environment and an
/// open-loop policy (needed by the failure-probability sensitivity
/// theory, which takes the simulator rate as a known input).
fn sim_failure_probability(env: &EnvSpec, policy: &Policy) -> Result<f64> {
    match (env, policy) {
        (EnvSpec::BernoulliTask(b), Policy::OpenLoop(plan)) => {
            Ok(b.failure_probability(plan[0][0]))
        }
        (EnvSpec::BernoulliTask(_), _) => Err(Error::Config(
            "failure-probability sensitivity needs an open-loop policy".into(),
        )),
        _ => Err(Error::Config(
            "failure-probability sensitivity needs the bernoulli_task environment".into(),
        )),
    }
}

fn nominal_bounds(exp: &Experiment, case_seed: u64) -> Result<Vec<(u64, BoundResult)>> {
    (0..exp.realizations)
        .into_par_iter()
        .map(|r| {
            let base = derive_seed(case_seed, DOMAIN_EXPERIMENT, 1 + r as u64);
            let batch = sample_batch(exp.env.as_env(), &exp.policy, exp.n, base, exp.record)?;
            Ok((base, bound_for_spec(&batch, &exp.spec)?))
        })
        .collect()
}

/// Runs the bound-coverage validation experiment and writes its outputs.
pub fn run_validate(exp: &Experiment) -> Result<ValidateSummary> {
    std::fs::create_dir_all(&exp.out_dir)?;
    let reference = exp.reference(&exp.env, exp.seed)?;
    let truth = truth_estimate(&reference, &exp.spec)?;
    let results = nominal_bounds(exp, exp.seed)?;

    let bound_values: Vec<f64> = results.iter().map(|(_, b)| b.value).collect();
    let covered = bound_values.iter().filter(|&&v| v >= truth).count();
    let defaulted_count = results.iter().filter(|(_, b)| b.defaulted).count();
    let mean_bound = bound_values.iter().sum::<f64>() / bound_values.len() as f64;
    let mut sorted = bound_values.clone();
    sorted.sort_by(f64::total_cmp);
    let quantile_rank = ((exp.spec.delta * exp.realizations as f64).ceil() as usize)
        .clamp(1, exp.realizations);
    let bound_delta_quantile = sorted[quantile_rank - 1];

    let rows: Vec<Vec<String>> = results
        .iter()
        .enumerate()
        .map(|(r, (base, b))| {
            vec![
                r.to_string(),
                base.to_string(),
                fmt_f64(b.value),
                fmt_opt(b.k_index),
                fmt_opt(b.epsilon.map(fmt_f64)),
                u8::from(b.defaulted).to_string(),
                u8::from(b.value >= truth).to_string(),
            ]
        })
        .collect();
    write_csv(
        &exp.out_dir.join("bounds.csv"),
        &["realization", "seed_base", "bound", "k_index", "epsilon", "defaulted", "covers"],
        &rows,
    )?;

    let cost_hist = Histogram::build(reference.values(), exp.bins, &[truth]);
    let bound_hist = Histogram::build(&bound_values, exp.bins, &[truth]);
    debug_assert_eq!(
        bound_hist.count_at_or_above(truth),
        covered as u64,
        "binned bound counts must recover the coverage count exactly"
    );
    for (hist, name) in [(&cost_hist, "cost_histogram.csv"), (&bound_hist, "bound_histogram.csv")] {
        let rows: Vec<Vec<String>> = hist
            .edges
            .windows(2)
            .zip(&hist.counts)
            .map(|(w, &c)| vec![fmt_f64(w[0]), fmt_f64(w[1]), c.to_string()])
            .collect();
        write_csv(&exp.out_dir.join(name), &["bin_lo", "bin_hi", "count"], &rows)?;
    }

    let svg = if exp.svg {
        let doc = histogram_overlay_svg(
            "reference values and realized bounds",
            &[("reference", &cost_hist, "steelblue"), ("bounds", &bound_hist, "darkorange")],
            Some((truth, "truth estimate")),
        );
        std::fs::write(exp.out_dir.join("validate.svg"), doc)?;
        Some("validate.svg".to_string())
    } else {
        None
    };

    Ok(ValidateSummary {
        schema: VALIDATE_SCHEMA,
        header: exp.header(),
        truth_estimate: truth,
        covered,
        empirical_coverage: covered as f64 / exp.realizations as f64,
        nominal_coverage: 1.0 - exp.spec.delta,
        bound_delta_quantile,
        mean_bound,
        defaulted_count,
        bounds_csv: "bounds.csv".to_string(),
        cost_histogram_csv: "cost_histogram.csv".to_string(),
        bound_histogram_csv: "bound_histogram.csv".to_string(),
        svg,
    })
}

fn require_sweep(exp: &Experiment) -> Result<()> {
    if exp.sweep.is_empty() {
        return Err(Error::Config(
            "this experiment needs at least one [[sweep]] case (offset, alpha)".into(),
        ));
    }
    Ok(())
}

/// Theoretical degraded error rate for the configured measure under a
/// one-sided shift of at most `alpha`.
fn theoretical_delta_true(exp: &Experiment, alpha: f64) -> Result<f64> {
    let result = match exp.spec.measure {
        Measure::ValueAtRisk => var_sensitivity(exp.n, exp.spec.tau, exp.spec.delta, alpha)?,
        Measure::Expectation | Measure::Cvar => cvar_sensitivity(exp.n, exp.spec.delta, alpha)?,
        Measure::FailureProbability => {
            let q_sim = sim_failure_probability(&exp.env, &exp.policy)?;
            failure_prob_sensitivity(exp.n as u64, q_sim, exp.spec.delta, alpha)?
        }
    };
    Ok(result.delta_true)
}

/// Runs the shift-sensitivity experiment: nominal certificates graded
/// against truths from shifted environments, next to the theoretical
/// floor.
pub fn run_sensitivity(exp: &Experiment) -> Result<SensitivitySummary> {
    require_sweep(exp)?;
    std::fs::create_dir_all(&exp.out_dir)?;

    let mut cases = Vec::with_capacity(exp.sweep.len());
    for (ci, case) in exp.sweep.iter().enumerate() {
        let shifted = apply_offset(&exp.env, case.offset)?;
        let case_seed = derive_seed(exp.seed, DOMAIN_EXPERIMENT_CASE, ci as u64);
        let truth = truth_estimate(&exp.reference(&shifted, case_seed)?, &exp.spec)?;
        let delta_true = theoretical_delta_true(exp, case.alpha)?;
        let results = nominal_bounds(exp, case_seed)?;
        let covered = results.iter().filter(|(_, b)| b.value >= truth).count();
        cases.push(SensitivityCase {
            offset: case.offset,
            alpha: case.alpha,
            delta_true_theoretical: delta_true,
            min_confidence: 1.0 - delta_true,
            truth_estimate: truth,
            covered,
            realizations: exp.realizations,
            empirical_confidence: covered as f64 / exp.realizations as f64,
        });
    }

    let rows: Vec<Vec<String>> = cases
        .iter()
        .map(|c| {
            vec![
                fmt_f64(c.offset),
                fmt_f64(c.alpha),
                fmt_f64(c.delta_true_theoretical),
                fmt_f64(c.min_confidence),
                fmt_f64(c.truth_estimate),
                c.covered.to_string(),
                c.realizations.to_string(),
                fmt_f64(c.empirical_confidence),
            ]
        })
        .collect();
    write_csv(
        &exp.out_dir.join("sensitivity.csv"),
        &[
            "offset",
            "alpha",
            "delta_true_theoretical",
            "min_confidence",
            "truth_estimate",
            "covered",
            "realizations",
            "empirical_confidence",
        ],
        &rows,
    )?;

    let svg = if exp.svg {
        let empirical: Vec<(f64, f64)> =
            cases.iter().map(|c| (c.offset, c.empirical_confidence)).collect();
        let floor: Vec<(f64, f64)> = cases.iter().map(|c| (c.offset, c.min_confidence)).collect();
        let doc = line_chart_svg(
            "empirical confidence under distribution shift",
            "offset",
            "confidence",
            &[
                ("empirical", &empirical, "seagreen"),
                ("guaranteed floor", &floor, "crimson"),
            ],
        );
        std::fs::write(exp.out_dir.join("sensitivity.svg"), doc)?;
        Some("sensitivity.svg".to_string())
    } else {
        None
    };

    Ok(SensitivitySummary {
        schema: SENSITIVITY_SCHEMA,
        header: exp.header(),
        cases,
        csv: "sensitivity.csv".to_string(),
        svg,
    })
}

fn robust_bound(exp: &Experiment, batch: &SampleBatch, alpha: f64) -> Result<BoundResult> {
    match exp.spec.measure {
        Measure::ValueAtRisk => robust_var_bound(batch, exp.spec.tau, exp.spec.delta, alpha),
        Measure::Cvar => robust_cvar_bound(batch, exp.spec.tau, exp.spec.delta, alpha),
        Measure::Expectation => robust_expectation_bound(batch, exp.spec.delta, alpha),
        Measure::FailureProbability => robust_failure_prob_bound(
            batch.count_above(0.0) as u64,
            batch.n() as u64,
            exp.spec.delta,
            alpha,
        ),
    }
}

/// Runs the robust-bound experiment: hardened certificates graded against
/// truths from shifted environments, cell by cell.
pub fn run_robust(exp: &Experiment) -> Result<RobustSummary> {
    require_sweep(exp)?;
    std::fs::create_dir_all(&exp.out_dir)?;
    let three_sigma = 3.0
        * (exp.spec.delta * (1.0 - exp.spec.delta) / exp.realizations as f64).sqrt();

    let mut cases = Vec::with_capacity(exp.sweep.len());
    for (ci, case) in exp.sweep.iter().enumerate() {
        let shifted = apply_offset(&exp.env, case.offset)?;
        let case_seed = derive_seed(exp.seed, DOMAIN_EXPERIMENT_CASE, ci as u64);
        let truth = truth_estimate(&exp.reference(&shifted, case_seed)?, &exp.spec)?;
        let covered = (0..exp.realizations)
            .into_par_iter()
            .map(|r| {
                let batch = exp.realization_batch(case_seed, r)?;
                Ok(u64::from(robust_bound(exp, &batch, case.alpha)?.value >= truth))
            })
            .collect::<Result<Vec<u64>>>()?
            .iter()
            .sum::<u64>() as usize;
        let empirical = covered as f64 / exp.realizations as f64;
        let admissible = case.offset <= case.alpha + 1e-12;
        cases.push(RobustCase {
            offset: case.offset,
            alpha: case.alpha,
            admissible,
            truth_estimate: truth,
            covered,
            realizations: exp.realizations,
            empirical_confidence: empirical,
            robust_bound_holds: admissible
                && empirical >= (1.0 - exp.spec.delta) - three_sigma,
        });
    }

    let rows: Vec<Vec<String>> = cases
        .iter()
        .map(|c| {
            vec![
                fmt_f64(c.offset),
                fmt_f64(c.alpha),
                u8::from(c.admissible).to_string(),
                fmt_f64(c.truth_estimate),
                c.covered.to_string(),
                c.realizations.to_string(),
                fmt_f64(c.empirical_confidence),
                u8::from(c.robust_bound_holds).to_string(),
            ]
        })
        .collect();
    write_csv(
        &exp.out_dir.join("robust.csv"),
        &[
            "offset",
            "alpha",
            "admissible",
            "truth_estimate",
            "covered",
            "realizations",
            "empirical_confidence",
            "robust_bound_holds",
        ],
        &rows,
    )?;

    let svg = if exp.svg {
        let mut alphas: Vec<f64> = Vec::new();
        for case in &cases {
            if !alphas.iter().any(|&a| a == case.alpha) {
                alphas.push(case.alpha);
            }
        }
        let palette = ["seagreen", "steelblue", "darkorange", "mediumpurple", "crimson", "gray"];
        let groups: Vec<(String, Vec<(f64, f64)>)> = alphas
            .iter()
            .map(|&a| {
                (
                    format!("alpha={a}"),
                    cases
                        .iter()
                        .filter(|c| c.alpha == a)
                        .map(|c| (c.offset, c.empirical_confidence))
                        .collect(),
                )
            })
            .collect();
        let series: Vec<(&str, &[(f64, f64)], &str)> = groups
            .iter()
            .enumerate()
            .map(|(i, (label, pts))| (label.as_str(), pts.as_slice(), palette[i % palette.len()]))
            .collect();
        let doc = line_chart_svg(
            "robust-bound confidence under distribution shift",
            "offset",
            "confidence",
            &series,
        );
        std::fs::write(exp.out_dir.join("robust.svg"), doc)?;
        Some("robust.svg".to_string())
    } else {
        None
    };

    Ok(RobustSummary {
        schema: ROBUST_SCHEMA,
        header: exp.header(),
        cases,
        csv: "robust.csv".to_string(),
        svg,
    })
}
