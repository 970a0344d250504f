//! Command-line surface: subcommands, flags, and flag-level enums.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use crate::bounds::Measure;
use crate::sim::RecordKind;
use crate::verify::{ChanceRoute, Correction};

#[derive(Debug, Parser)]
#[command(
    name = "riskcert",
    version,
    about = "Distribution-free, finite-sample risk certificates for control policies",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a risk certificate from persisted rollouts or a failure tally
    Bound(BoundArgs),
    /// Run a chance-constraint acceptance test (exit 0 accepted, 1 rejected)
    Test(TestArgs),
    /// Certify several policies at a corrected budget and pick the lowest bound
    Select(SelectArgs),
    /// Run seeded rollouts and persist them as JSON lines
    Rollout(RolloutArgs),
    /// Synthesize an open-loop plan by cross-entropy search
    Synth(SynthArgs),
    /// List the builtin environments
    Envs,
    /// Bound-coverage validation experiment (config-driven)
    Validate(ExperimentArgs),
    /// Distribution-shift sensitivity experiment (config-driven)
    Sensitivity(ExperimentArgs),
    /// Robust-bound experiment (config-driven)
    Robust(ExperimentArgs),
}

/// Risk measure, as spelled on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Var,
    #[value(alias = "mean")]
    Expectation,
    Cvar,
    #[value(alias = "failure_probability")]
    Failprob,
}

impl MeasureArg {
    pub fn measure(self) -> Measure {
        match self {
            MeasureArg::Var => Measure::ValueAtRisk,
            MeasureArg::Expectation => Measure::Expectation,
            MeasureArg::Cvar => Measure::Cvar,
            MeasureArg::Failprob => Measure::FailureProbability,
        }
    }
}

/// Which per-rollout scalar to read from records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordArg {
    Cost,
    Constraint,
}

impl RecordArg {
    pub fn kind(self) -> RecordKind {
        match self {
            RecordArg::Cost => RecordKind::Cost,
            RecordArg::Constraint => RecordKind::Constraint,
        }
    }
}

/// Chance-constraint test route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Compare the quantile certificate against the cutoff
    Var,
    /// Compare the failure tally against the largest acceptable count
    Count,
}

impl RouteArg {
    pub fn route(self) -> ChanceRoute {
        match self {
            RouteArg::Var => ChanceRoute::ViaVarOrderStatistic,
            RouteArg::Count => ChanceRoute::ViaFailureProbability,
        }
    }
}

/// Multi-hypothesis correction for policy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    Sidak,
    Bonferroni,
    None,
}

impl CorrectionArg {
    pub fn correction(self) -> Correction {
        match self {
            CorrectionArg::Sidak => Correction::Sidak,
            CorrectionArg::Bonferroni => Correction::Bonferroni,
            CorrectionArg::None => Correction::None,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Risk measure to certify
    #[arg(long, value_enum)]
    pub measure: MeasureArg,
    /// Quantile level (var) or tail level (cvar)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Failure budget: the certificate holds with probability >= 1 - delta
    #[arg(long)]
    pub delta: f64,
    /// JSON-lines rollout file to read samples from
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Which per-rollout scalar to certify
    #[arg(long, value_enum, default_value = "cost")]
    pub record: RecordArg,
    /// Observed failure count (tally mode; failprob only, with --n)
    #[arg(long)]
    pub k: Option<u64>,
    /// Number of trials (tally mode; failprob only, with --k)
    #[arg(long)]
    pub n: Option<u64>,
    /// Almost-sure ceiling on the recorded scalar (required by
    /// expectation/cvar when the data carries none)
    #[arg(long)]
    pub upper_bound: Option<f64>,
    /// Robustness budget: harden the certificate against a one-sided
    /// distribution shift of at most this much
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Also write the JSON report to this file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Required pass probability: the constraint must hold with
    /// probability at least tau
    #[arg(long)]
    pub tau: f64,
    /// Guaranteed false-acceptance rate of the test
    #[arg(long)]
    pub delta: f64,
    /// JSON-lines rollout file with constraint observations
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Which per-rollout scalar carries the constraint
    #[arg(long, value_enum, default_value = "constraint")]
    pub record: RecordArg,
    /// Observed failure count (tally mode; with --n)
    #[arg(long)]
    pub k: Option<u64>,
    /// Number of trials (tally mode; with --k)
    #[arg(long)]
    pub n: Option<u64>,
    /// Test route (tally input always uses the count route)
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    /// Constraint cutoff: a rollout passes when the recorded value is at
    /// most this (default 0; not applicable to tally input)
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Also write the JSON report to this file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// JSON-lines rollout file for each candidate policy (repeatable)
    #[arg(long = "in", value_name = "FILE", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Risk measure the policies compete on
    #[arg(long, value_enum)]
    pub measure: MeasureArg,
    /// Quantile level (var) or tail level (cvar)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Family-wise failure budget across all candidates
    #[arg(long)]
    pub delta: f64,
    /// Which per-rollout scalar to certify
    #[arg(long, value_enum, default_value = "cost")]
    pub record: RecordArg,
    /// Almost-sure ceiling applied to every batch
    #[arg(long)]
    pub upper_bound: Option<f64>,
    /// Multi-hypothesis correction
    #[arg(long, value_enum, default_value = "sidak")]
    pub correction: CorrectionArg,
    /// Acknowledge that --correction none voids the family-wise guarantee
    #[arg(long)]
    pub unsafe_no_correction: bool,
    /// Tolerate certificates that defaulted to the almost-sure ceiling
    #[arg(long)]
    pub allow_defaulted: bool,
    /// Also write the JSON report to this file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    /// Builtin environment name (see `riskcert envs`)
    #[arg(long, conflicts_with = "env_config")]
    pub env: Option<String>,
    /// Environment config file (TOML)
    #[arg(long, value_name = "FILE")]
    pub env_config: Option<PathBuf>,
    /// Open-loop plan file (JSON); defaults to the all-zero plan
    #[arg(long, value_name = "FILE")]
    pub policy: Option<PathBuf>,
    /// Number of rollouts
    #[arg(short = 'n', long = "count")]
    pub count: usize,
    /// Base seed; rollout i uses seed + i
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep full state/control trajectories on each record
    #[arg(long)]
    pub capture: bool,
    /// Output JSON-lines file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Builtin environment name (see `riskcert envs`)
    #[arg(long, conflicts_with = "env_config")]
    pub env: Option<String>,
    /// Environment config file (TOML)
    #[arg(long, value_name = "FILE")]
    pub env_config: Option<PathBuf>,
    /// Search seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample-score-refit rounds
    #[arg(long)]
    pub generations: Option<usize>,
    /// Candidate plans per generation
    #[arg(long)]
    pub population: Option<usize>,
    /// Lowest-cost candidates the proposal is refit to
    #[arg(long)]
    pub elites: Option<usize>,
    /// Rollouts averaged per candidate score
    #[arg(long)]
    pub evaluations: Option<usize>,
    /// Initial proposal mean
    #[arg(long)]
    pub init_mean: Option<f64>,
    /// Initial proposal standard deviation
    #[arg(long)]
    pub init_std: Option<f64>,
    /// Directory receiving plan.json and cem_trace.csv
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config file (TOML)
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    /// Output directory (overrides the config's output_dir)
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}
