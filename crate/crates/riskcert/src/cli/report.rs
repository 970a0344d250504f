//! JSON report payloads.
//!
//! Every command prints exactly one JSON document to stdout, tagged with a
//! versioned `schema` string so downstream consumers can dispatch without
//! guessing. Reports are rendered with stable field order (declaration
//! order) and shortest round-trip float formatting, so identical runs emit
//! identical bytes.

use serde::Serialize;

use crate::bounds::BoundResult;
use crate::sim::CatalogEntry;
use crate::synth::CemConfig;
use crate::verify::SelectionReport;

pub const BOUND_SCHEMA: &str = "riskcert.bound.v1";
pub const TEST_SCHEMA: &str = "riskcert.test.v1";
pub const SELECT_SCHEMA: &str = "riskcert.select.v1";
pub const ROLLOUT_SCHEMA: &str = "riskcert.rollout.v1";
pub const SYNTH_SCHEMA: &str = "riskcert.synth.v1";
pub const ENVS_SCHEMA: &str = "riskcert.envs.v1";
pub const VALIDATE_SCHEMA: &str = "riskcert.validate.v1";
pub const SENSITIVITY_SCHEMA: &str = "riskcert.sensitivity.v1";
pub const ROBUST_SCHEMA: &str = "riskcert.robust.v1";
pub const ERROR_SCHEMA: &str = "riskcert.error.v1";

/// One computed certificate.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub schema: &'static str,
    pub measure: &'static str,
    pub tau: Option<f64>,
    pub delta: f64,
    pub n: usize,
    pub bound: f64,
    pub k_index: Option<usize>,
    pub epsilon: Option<f64>,
    pub defaulted: bool,
    pub nominal_confidence: f64,
    /// Robustness budget the certificate was hardened against, when any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl BoundReport {
    pub fn new(
        result: &BoundResult,
        tau: Option<f64>,
        delta: f64,
        n: usize,
        alpha: Option<f64>,
    ) -> Self {
        Self {
            schema: BOUND_SCHEMA,
            measure: result.measure.name(),
            tau,
            delta,
            n,
            bound: result.value,
            k_index: result.k_index,
            epsilon: result.epsilon,
            defaulted: result.defaulted,
            nominal_confidence: result.nominal_confidence,
            alpha,
        }
    }
}

/// Verdict of a chance-constraint test.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub schema: &'static str,
    pub accepted: bool,
    pub bound: f64,
    pub cutoff: f64,
    pub delta: f64,
    pub tau: f64,
    pub route: &'static str,
    pub measure: &'static str,
    pub n: usize,
    pub defaulted: bool,
    /// Probability the test accepts a policy that actually violates the
    /// constraint.
    pub guaranteed_false_accept_rate: f64,
}

/// One candidate's certificate inside a selection report.
#[derive(Debug, Clone, Serialize)]
pub struct SelectPolicyRow {
    pub index: usize,
    pub input: String,
    pub n: usize,
    pub bound: f64,
    pub k_index: Option<usize>,
    pub epsilon: Option<f64>,
    pub defaulted: bool,
}

/// Outcome of lowest-bound policy selection.
#[derive(Debug, Clone, Serialize)]
pub struct SelectReport {
    pub schema: &'static str,
    pub measure: &'static str,
    pub tau: Option<f64>,
    pub delta: f64,
    pub inflated_delta: f64,
    pub correction: &'static str,
    pub chosen_index: usize,
    pub chosen_input: String,
    pub chosen_bound: f64,
    pub joint_confidence: f64,
    pub policies: Vec<SelectPolicyRow>,
}

impl SelectReport {
    pub fn new(
        report: &SelectionReport,
        tau: Option<f64>,
        inputs: &[String],
        sizes: &[usize],
    ) -> Self {
        let policies = report
            .per_policy_bounds
            .iter()
            .enumerate()
            .map(|(index, b)| SelectPolicyRow {
                index,
                input: inputs[index].clone(),
                n: sizes[index],
                bound: b.value,
                k_index: b.k_index,
                epsilon: b.epsilon,
                defaulted: b.defaulted,
            })
            .collect();
        Self {
            schema: SELECT_SCHEMA,
            measure: report.per_policy_bounds[report.chosen_index].measure.name(),
            tau,
            delta: report.delta,
            inflated_delta: report.inflated_delta,
            correction: report.correction.name(),
            chosen_index: report.chosen_index,
            chosen_input: inputs[report.chosen_index].clone(),
            chosen_bound: report.chosen_bound,
            joint_confidence: report.joint_confidence,
            policies,
        }
    }
}

/// Summary of a persisted rollout batch.
#[derive(Debug, Clone, Serialize)]
pub struct RolloutReport {
    pub schema: &'static str,
    pub environment: &'static str,
    pub n: usize,
    pub seed: u64,
    pub capture: bool,
    pub out: String,
    pub mean_cost: f64,
    pub mean_constraint: f64,
    pub violation_fraction: f64,
    pub clipped_count: usize,
}

/// Summary of a plan-synthesis run.
#[derive(Debug, Clone, Serialize)]
pub struct SynthReport {
    pub schema: &'static str,
    pub environment: &'static str,
    pub seed: u64,
    pub config: CemConfig,
    pub best_cost: f64,
    pub plan_file: String,
    pub trace_file: String,
}

/// The environment catalog.
#[derive(Debug, Clone, Serialize)]
pub struct EnvsReport {
    pub schema: &'static str,
    pub environments: Vec<CatalogEntry>,
}

/// Machine-readable failure, printed to stderr before a nonzero exit.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub schema: &'static str,
    pub code: &'static str,
    pub message: String,
}

/// Shared experiment header: what was run, under which knobs.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentHeader {
    pub environment: &'static str,
    pub policy_source: &'static str,
    pub measure: &'static str,
    pub tau: Option<f64>,
    pub delta: f64,
    pub n: usize,
    pub realizations: usize,
    pub reference_rollouts: usize,
    pub record: &'static str,
    pub seed: u64,
}

/// Summary of a bound-coverage validation experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ValidateSummary {
    pub schema: &'static str,
    #[serde(flatten)]
    pub header: ExperimentHeader,
    /// Monte Carlo estimate of the true measure from the reference batch
    /// (an estimate, not ground truth).
    pub truth_estimate: f64,
    /// Realizations whose bound was at least the truth estimate.
    pub covered: usize,
    pub empirical_coverage: f64,
    pub nominal_coverage: f64,
    /// The delta-quantile of the realized bounds.
    pub bound_delta_quantile: f64,
    pub mean_bound: f64,
    pub defaulted_count: usize,
    pub bounds_csv: String,
    pub cost_histogram_csv: String,
    pub bound_histogram_csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

/// One sensitivity sweep case.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityCase {
    pub offset: f64,
    pub alpha: f64,
    /// Degraded error rate on the shifted distribution.
    pub delta_true_theoretical: f64,
    /// The guaranteed floor `1 - delta_true_theoretical`.
    pub min_confidence: f64,
    pub truth_estimate: f64,
    pub covered: usize,
    pub realizations: usize,
    pub empirical_confidence: f64,
}

/// Summary of a shift-sensitivity experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivitySummary {
    pub schema: &'static str,
    #[serde(flatten)]
    pub header: ExperimentHeader,
    pub cases: Vec<SensitivityCase>,
    pub csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

/// One robust sweep case.
#[derive(Debug, Clone, Serialize)]
pub struct RobustCase {
    pub offset: f64,
    pub alpha: f64,
    /// Whether the true shift is within the robustness budget; only
    /// admissible cells carry a guarantee.
    pub admissible: bool,
    pub truth_estimate: f64,
    pub covered: usize,
    pub realizations: usize,
    pub empirical_confidence: f64,
    /// Admissible and empirically at the nominal floor (minus three
    /// binomial standard errors).
    pub robust_bound_holds: bool,
}

/// Summary of a robust-bound experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RobustSummary {
    pub schema: &'static str,
    #[serde(flatten)]
    pub header: ExperimentHeader,
    pub cases: Vec<RobustCase>,
    pub csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}
