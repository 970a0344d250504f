//! Command-line interface.
//!
//! Every command prints exactly one JSON report to stdout (schema-tagged,
//! stable field order) and uses the exit code as its machine-readable
//! verdict:
//!
//! * `0` — success (for `test`: the policy was accepted)
//! * `1` — `test` ran correctly and rejected the policy
//! * `2` — error: invalid arguments, unreadable input, or an infeasible
//!   request (for example a sample size too small for the requested
//!   confidence)
//! * `64` — command-line usage error (unknown flags or subcommands)
//! * `65` — malformed config file
//!
//! Errors print a `riskcert.error.v1` JSON document to stderr so scripted
//! callers never have to parse prose.

pub mod args;
pub mod experiment;
pub(crate) mod hist;
pub mod report;
pub(crate) mod svg;
pub(crate) mod tables;

use std::path::Path;

use clap::Parser;
use serde::Serialize;

use crate::bounds::{failure_prob_bound, BoundResult, Measure, RiskSpec};
use crate::error::{Error, Result};
use crate::shift::{
    robust_cvar_bound, robust_expectation_bound, robust_failure_prob_bound, robust_var_bound,
};
use crate::sim::{
    builtin, builtin_environments, load_env_file, load_plan, load_rollouts, persist_rollouts,
    records_to_batch, run_rollouts, save_plan, EnvSpec, Policy, RecordKind,
};
use crate::stats::SampleBatch;
use crate::synth::{cem_optimize, CemConfig};
use crate::verify::{
    bound_for_spec, constraint_test, select_policy, ChanceRoute, ConstraintSpec, Correction,
    TestInput, TestOutcome,
};

use args::{
    BoundArgs, Cli, Command, ExperimentArgs, RolloutArgs, RouteArg, SelectArgs, SynthArgs,
    TestArgs,
};
use experiment::{build_spec, load_experiment, run_robust, run_sensitivity, run_validate};
use report::{
    BoundReport, EnvsReport, ErrorReport, RolloutReport, SelectReport, SynthReport, TestReport,
    ENVS_SCHEMA, ERROR_SCHEMA, ROLLOUT_SCHEMA, SYNTH_SCHEMA, TEST_SCHEMA,
};
use tables::{fmt_f64, write_csv};

/// Parses the command line, runs the selected command, and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            let report =
                ErrorReport { schema: ERROR_SCHEMA, code: err.code(), message: err.to_string() };
            match serde_json::to_string_pretty(&report) {
                Ok(json) => eprintln!("{json}"),
                Err(_) => eprintln!("{err}"),
            }
            match err {
                Error::Config(_) => 65,
                _ => 2,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Bound(args) => cmd_bound(args),
        Command::Test(args) => cmd_test(args),
        Command::Select(args) => cmd_select(args),
        Command::Rollout(args) => cmd_rollout(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Envs => cmd_envs(),
        Command::Validate(args) => cmd_experiment(args, ExperimentKind::Validate),
        Command::Sensitivity(args) => cmd_experiment(args, ExperimentKind::Sensitivity),
        Command::Robust(args) => cmd_experiment(args, ExperimentKind::Robust),
    }
}

/// Prints a report to stdout and mirrors the same bytes to `out` when set.
fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::invalid(format!("report not serializable: {e}")))?;
    json.push('\n');
    print!("{json}");
    if let Some(path) = out {
        std::fs::write(path, &json)?;
    }
    Ok(())
}

fn load_batch(path: &Path, kind: RecordKind, upper_bound: Option<f64>) -> Result<SampleBatch> {
    let records = load_rollouts(path)?;
    records_to_batch(&records, kind, upper_bound)
}

/// `tau` as reports spell it: present only for quantile-based measures.
fn spec_tau(spec: &RiskSpec) -> Option<f64> {
    match spec.measure {
        Measure::ValueAtRisk | Measure::Cvar => Some(spec.tau),
        Measure::Expectation | Measure::FailureProbability => None,
    }
}

/// Nominal certificate, or the shift-hardened one when a budget is given.
fn bound_with_alpha(
    batch: &SampleBatch,
    spec: &RiskSpec,
    alpha: Option<f64>,
) -> Result<BoundResult> {
    let Some(alpha) = alpha else {
        return bound_for_spec(batch, spec);
    };
    match spec.measure {
        Measure::ValueAtRisk => robust_var_bound(batch, spec.tau, spec.delta, alpha),
        Measure::Cvar => robust_cvar_bound(batch, spec.tau, spec.delta, alpha),
        Measure::Expectation => robust_expectation_bound(batch, spec.delta, alpha),
        Measure::FailureProbability => robust_failure_prob_bound(
            batch.count_above(0.0) as u64,
            batch.n() as u64,
            spec.delta,
            alpha,
        ),
    }
}

fn cmd_bound(args: BoundArgs) -> Result<i32> {
    let spec = build_spec(args.measure.measure(), args.tau, args.delta)?;
    let report = match (args.k, args.n, &args.input) {
        (Some(k), Some(n), None) => {
            if spec.measure != Measure::FailureProbability {
                return Err(Error::invalid(
                    "a --k/--n failure tally certifies failure probability; \
                     other measures need sample files (--in)",
                ));
            }
            if args.upper_bound.is_some() {
                return Err(Error::invalid("--upper-bound has no effect on a failure tally"));
            }
            let result = match args.alpha {
                None => failure_prob_bound(k, n, args.delta)?,
                Some(alpha) => robust_failure_prob_bound(k, n, args.delta, alpha)?,
            };
            BoundReport::new(&result, None, args.delta, n as usize, args.alpha)
        }
        (None, None, Some(path)) => {
            let batch = load_batch(path, args.record.kind(), args.upper_bound)?;
            let result = bound_with_alpha(&batch, &spec, args.alpha)?;
            BoundReport::new(&result, spec_tau(&spec), args.delta, batch.n(), args.alpha)
        }
        _ => {
            return Err(Error::invalid(
                "give exactly one input: --in FILE, or a full --k/--n failure tally",
            ));
        }
    };
    emit(&report, args.out.as_deref())?;
    Ok(0)
}

fn route_name(route: ChanceRoute) -> &'static str {
    match route {
        ChanceRoute::ViaVarOrderStatistic => "var",
        ChanceRoute::ViaFailureProbability => "count",
    }
}

fn cmd_test(args: TestArgs) -> Result<i32> {
    let (outcome, route, n) = match (args.k, args.n, &args.input) {
        (Some(k), Some(trials), None) => {
            if args.route == Some(RouteArg::Var) {
                return Err(Error::invalid(
                    "a --k/--n tally has no sample values to take a quantile of; \
                     it always tests via the count route",
                ));
            }
            if args.cutoff.is_some() {
                return Err(Error::invalid(
                    "--cutoff has no effect on a tally: the counts already encode pass/fail",
                ));
            }
            let spec =
                ConstraintSpec::chance(args.tau, args.delta, ChanceRoute::ViaFailureProbability)?;
            let outcome = constraint_test(TestInput::Failures { failures: k, trials }, &spec)?;
            (outcome, ChanceRoute::ViaFailureProbability, trials as usize)
        }
        (None, None, Some(path)) => {
            let batch = load_batch(path, args.record.kind(), None)?;
            let cutoff = args.cutoff.unwrap_or(0.0);
            let route = args.route.map(RouteArg::route).unwrap_or(ChanceRoute::ViaVarOrderStatistic);
            let outcome = match route {
                ChanceRoute::ViaVarOrderStatistic => {
                    let mut spec = ConstraintSpec::new(RiskSpec::var(args.tau, args.delta)?, cutoff)?;
                    spec.route = Some(route);
                    constraint_test(TestInput::Batch(&batch), &spec)?
                }
                ChanceRoute::ViaFailureProbability => {
                    if !cutoff.is_finite() {
                        return Err(Error::invalid(format!(
                            "constraint cutoff must be finite, got {cutoff}"
                        )));
                    }
                    let spec = ConstraintSpec::chance(args.tau, args.delta, route)?;
                    constraint_test(
                        TestInput::Failures {
                            failures: batch.count_above(cutoff) as u64,
                            trials: batch.n() as u64,
                        },
                        &spec,
                    )?
                }
            };
            (outcome, route, batch.n())
        }
        _ => {
            return Err(Error::invalid(
                "give exactly one input: --in FILE, or a full --k/--n failure tally",
            ));
        }
    };
    let TestOutcome { accepted, bound, cutoff, guaranteed_false_accept_rate } = outcome;
    let report = TestReport {
        schema: TEST_SCHEMA,
        accepted,
        bound: bound.value,
        cutoff,
        delta: args.delta,
        tau: args.tau,
        route: route_name(route),
        measure: bound.measure.name(),
        n,
        defaulted: bound.defaulted,
        guaranteed_false_accept_rate,
    };
    emit(&report, args.out.as_deref())?;
    Ok(if accepted { 0 } else { 1 })
}

fn cmd_select(args: SelectArgs) -> Result<i32> {
    let correction = args.correction.correction();
    if correction == Correction::None && !args.unsafe_no_correction {
        return Err(Error::invalid(
            "--correction none voids the family-wise guarantee; \
             pass --unsafe-no-correction to proceed anyway",
        ));
    }
    let spec = build_spec(args.measure.measure(), args.tau, args.delta)?;
    let kind = args.record.kind();
    let batches = args
        .inputs
        .iter()
        .map(|path| load_batch(path, kind, args.upper_bound))
        .collect::<Result<Vec<SampleBatch>>>()?;
    let selection = select_policy(&batches, &spec, correction, args.allow_defaulted)?;
    let inputs: Vec<String> = args.inputs.iter().map(|p| p.display().to_string()).collect();
    let sizes: Vec<usize> = batches.iter().map(SampleBatch::n).collect();
    let report = SelectReport::new(&selection, spec_tau(&spec), &inputs, &sizes);
    emit(&report, args.out.as_deref())?;
    Ok(0)
}

fn resolve_env(name: Option<&str>, config: Option<&Path>) -> Result<EnvSpec> {
    match (name, config) {
        (Some(name), None) => builtin(name),
        (None, Some(path)) => Ok(load_env_file(path)?.environment),
        _ => Err(Error::invalid("give an environment: --env NAME or --env-config FILE")),
    }
}

fn cmd_rollout(args: RolloutArgs) -> Result<i32> {
    let env_spec = resolve_env(args.env.as_deref(), args.env_config.as_deref())?;
    let env = env_spec.as_env();
    let policy = match &args.policy {
        Some(path) => Policy::open_loop(load_plan(path)?),
        None => Policy::zero(env.horizon(), env.control_dim()),
    };
    let records = run_rollouts(env, &policy, args.count, args.seed, args.capture)?;
    persist_rollouts(&args.out, &records)?;
    let n = records.len() as f64;
    let report = RolloutReport {
        schema: ROLLOUT_SCHEMA,
        environment: env.name(),
        n: records.len(),
        seed: args.seed,
        capture: args.capture,
        out: args.out.display().to_string(),
        mean_cost: records.iter().map(|r| r.total_cost).sum::<f64>() / n,
        mean_constraint: records.iter().map(|r| r.constraint_value).sum::<f64>() / n,
        violation_fraction: records.iter().filter(|r| r.constraint_value > 0.0).count() as f64 / n,
        clipped_count: records.iter().filter(|r| r.clipped).count(),
    };
    emit(&report, None)?;
    Ok(0)
}

fn cmd_synth(args: SynthArgs) -> Result<i32> {
    let env_spec = resolve_env(args.env.as_deref(), args.env_config.as_deref())?;
    let env = env_spec.as_env();
    let mut config = CemConfig::default();
    if let Some(v) = args.generations {
        config.generations = v;
    }
    if let Some(v) = args.population {
        config.population = v;
    }
    if let Some(v) = args.elites {
        config.elites = v;
    }
    if let Some(v) = args.evaluations {
        config.evaluations_per_candidate = v;
    }
    if let Some(v) = args.init_mean {
        config.init_mean = v;
    }
    if let Some(v) = args.init_std {
        config.init_std = v;
    }
    let result = cem_optimize(env, &config, args.seed)?;
    std::fs::create_dir_all(&args.out_dir)?;
    save_plan(&args.out_dir.join("plan.json"), &result.plan)?;
    let rows: Vec<Vec<String>> = result
        .trace
        .iter()
        .map(|g| {
            vec![
                g.generation.to_string(),
                fmt_f64(g.best_cost),
                fmt_f64(g.median_cost),
                fmt_f64(g.elite_threshold),
                fmt_f64(g.mean_std),
            ]
        })
        .collect();
    write_csv(
        &args.out_dir.join("cem_trace.csv"),
        &["generation", "best_cost", "median_cost", "elite_threshold", "mean_std"],
        &rows,
    )?;
    let report = SynthReport {
        schema: SYNTH_SCHEMA,
        environment: env.name(),
        seed: args.seed,
        config,
        best_cost: result.best_cost,
        plan_file: "plan.json".to_string(),
        trace_file: "cem_trace.csv".to_string(),
    };
    emit(&report, None)?;
    Ok(0)
}

fn cmd_envs() -> Result<i32> {
    let report = EnvsReport { schema: ENVS_SCHEMA, environments: builtin_environments() };
    emit(&report, None)?;
    Ok(0)
}

enum ExperimentKind {
    Validate,
    Sensitivity,
    Robust,
}

fn cmd_experiment(args: ExperimentArgs, kind: ExperimentKind) -> Result<i32> {
    let exp = load_experiment(&args.config, args.out_dir)?;
    let json = match kind {
        ExperimentKind::Validate => render(&run_validate(&exp)?)?,
        ExperimentKind::Sensitivity => render(&run_sensitivity(&exp)?)?,
        ExperimentKind::Robust => render(&run_robust(&exp)?)?,
    };
    std::fs::write(exp.out_dir.join("summary.json"), &json)?;
    print!("{json}");
    Ok(0)
}

fn render<T: Serialize>(report: &T) -> Result<String> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::invalid(format!("report not serializable: {e}")))?;
    json.push('\n');
    Ok(json)
}
