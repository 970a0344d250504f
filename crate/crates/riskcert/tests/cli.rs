//! End-to-end tests of the command-line surface: report schemas and golden
//! values, exit-code conventions, `--out` mirroring, and the exact
//! consistency between experiment summaries and the CSV files they index.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riskcert"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout was not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn stderr_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stderr).unwrap_or_else(|e| {
        panic!(
            "stderr was not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stderr)
        )
    })
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process should exit, not be signalled")
}

/// Writes a small rollout file and returns its path.
fn rollout_file(dir: &Path, count: u32, seed: u32) -> String {
    let path = dir.join(format!("rollouts_{seed}.jsonl"));
    let out = run(&[
        "rollout",
        "--env",
        "direct_distribution",
        "--count",
        &count.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "rollout failed: {}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn tally_failure_bound_reproduces_the_exact_inversion() {
    let out = run(&["bound", "--measure", "failprob", "--k", "0", "--n", "10", "--delta", "0.2"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "riskcert.bound.v1");
    assert_eq!(report["measure"], "failure_probability");
    assert_eq!(report["n"], 10);
    assert_eq!(report["defaulted"], false);
    assert_eq!(report["nominal_confidence"], 0.8);
    // Largest q with Bin(0; 10, q) >= 0.2, i.e. 1 - 0.2^(1/10).
    let bound = report["bound"].as_f64().unwrap();
    assert!((bound - 0.148_660_077_479_215_4).abs() < 1e-9, "bound was {bound}");
}

#[test]
fn file_bound_and_out_mirroring_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let rollouts = rollout_file(dir.path(), 100, 1);
    let mirror = dir.path().join("report.json");
    let out = run(&[
        "bound",
        "--in",
        &rollouts,
        "--measure",
        "var",
        "--tau",
        "0.7",
        "--delta",
        "0.2",
        "--record",
        "cost",
        "--out",
        mirror.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["measure"], "var");
    assert_eq!(report["k_index"], 75, "n = 100, tau = 0.7, delta = 0.2 selects the 75th order statistic");
    assert_eq!(report["defaulted"], false);
    let value = report["bound"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&value), "Uniform[0,1] order statistic out of range: {value}");
    // --out mirrors stdout byte for byte.
    assert_eq!(std::fs::read(&mirror).unwrap(), out.stdout);
}

#[test]
fn cvar_without_a_ceiling_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let rollouts = rollout_file(dir.path(), 50, 2);
    let out = run(&[
        "bound", "--in", &rollouts, "--measure", "cvar", "--tau", "0.7", "--delta", "0.2",
        "--record", "cost",
    ]);
    assert_eq!(code(&out), 2);
    let err = stderr_json(&out);
    assert_eq!(err["schema"], "riskcert.error.v1");
    assert_eq!(err["code"], "missing_upper_bound");

    // Supplying the ceiling fixes it.
    let ok = run(&[
        "bound", "--in", &rollouts, "--measure", "cvar", "--tau", "0.7", "--delta", "0.2",
        "--record", "cost", "--upper-bound", "1",
    ]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout_json(&ok)["measure"], "cvar");
}

#[test]
fn usage_and_config_errors_use_distinct_exit_codes() {
    // Unknown flag: usage error.
    assert_eq!(code(&run(&["bound", "--no-such-flag"])), 64);
    // Help and version exit cleanly.
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["bound", "--help"])), 0);
    // A config file the parser rejects: configuration error.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "config_version = 99\n").unwrap();
    let out = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 65);
    assert_eq!(stderr_json(&out)["code"], "config");
}

#[test]
fn uncorrected_selection_requires_the_explicit_override() {
    let dir = tempfile::tempdir().unwrap();
    let a = rollout_file(dir.path(), 30, 11);
    let b = rollout_file(dir.path(), 30, 12);
    let base = [
        "select", "--in", &a, "--in", &b, "--measure", "var", "--tau", "0.7", "--delta", "0.2",
        "--record", "cost", "--correction", "none",
    ];
    let refused = run(&base);
    assert_eq!(code(&refused), 2, "correction none without the override must refuse");
    assert_eq!(stderr_json(&refused)["code"], "invalid_argument");

    let mut with_override: Vec<&str> = base.to_vec();
    with_override.push("--unsafe-no-correction");
    let accepted = run(&with_override);
    assert_eq!(code(&accepted), 0, "{}", String::from_utf8_lossy(&accepted.stderr));
    let report = stdout_json(&accepted);
    assert_eq!(report["schema"], "riskcert.select.v1");
    assert_eq!(report["policies"].as_array().unwrap().len(), 2);
}

#[test]
fn test_exit_codes_encode_the_verdict() {
    // n = 10, tau = 0.7, delta = 0.2 accepts at most 1 failure.
    let accept = run(&["test", "--k", "1", "--n", "10", "--tau", "0.7", "--delta", "0.2"]);
    assert_eq!(code(&accept), 0);
    let report = stdout_json(&accept);
    assert_eq!(report["schema"], "riskcert.test.v1");
    assert_eq!(report["accepted"], true);
    assert_eq!(report["route"], "count");
    assert_eq!(report["guaranteed_false_accept_rate"], 0.2);

    let reject = run(&["test", "--k", "2", "--n", "10", "--tau", "0.7", "--delta", "0.2"]);
    assert_eq!(code(&reject), 1);
    assert_eq!(stdout_json(&reject)["accepted"], false);

    // A tally is already count-route data; asking for the quantile route
    // on it is a contradiction, not a verdict.
    let confused = run(&[
        "test", "--k", "1", "--n", "10", "--tau", "0.7", "--delta", "0.2", "--route", "var",
    ]);
    assert_eq!(code(&confused), 2);
}

#[test]
fn envs_lists_every_builtin() {
    let out = run(&["envs"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "riskcert.envs.v1");
    let names: Vec<&str> = report["environments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    for expected in ["linear_gaussian", "cliff_walk_1d", "bernoulli_task", "direct_distribution"] {
        assert!(names.contains(&expected), "missing builtin {expected} in {names:?}");
    }
}

#[test]
fn rollout_honors_environment_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let env_file = dir.path().join("env.toml");
    std::fs::write(&env_file, "config_version = 1\n[environment.bernoulli_task]\nfail_base = 0.0\n")
        .unwrap();
    let out_file = dir.path().join("safe.jsonl");
    let out = run(&[
        "rollout",
        "--env-config",
        env_file.to_str().unwrap(),
        "--count",
        "40",
        "--seed",
        "5",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "riskcert.rollout.v1");
    assert_eq!(report["environment"], "bernoulli_task");
    assert_eq!(report["n"], 40);
    // fail_base 0 with the zero plan never fails.
    assert_eq!(report["violation_fraction"], 0.0);
    assert_eq!(report["mean_constraint"], 0.0);
    let lines = std::fs::read_to_string(&out_file).unwrap();
    assert_eq!(lines.lines().count(), 40);
}

#[test]
fn synth_writes_a_loadable_plan_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        "--env",
        "bernoulli_task",
        "--seed",
        "3",
        "--generations",
        "4",
        "--population",
        "30",
        "--elites",
        "6",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "riskcert.synth.v1");
    assert!(report["best_cost"].as_f64().unwrap().is_finite());

    let plan = dir.path().join("plan.json");
    let trace = dir.path().join("cem_trace.csv");
    assert!(plan.exists() && trace.exists());
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(trace_text.lines().count(), 1 + 4, "header plus one row per generation");

    // The written plan round-trips through the rollout command.
    let replay = run(&[
        "rollout",
        "--env",
        "bernoulli_task",
        "--policy",
        plan.to_str().unwrap(),
        "--count",
        "10",
        "--out",
        dir.path().join("replay.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stderr));
}

const VALIDATE_CONFIG: &str = r#"
config_version = 1
seed = 9
n = 30
realizations = 60
reference_rollouts = 500
bins = 12
[environment.direct_distribution]
[policy]
source = "zero"
[measure]
kind = "var"
tau = 0.7
delta = 0.2
"#;

#[test]
fn validate_summary_agrees_with_its_csv_files_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, VALIDATE_CONFIG).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "validate",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["schema"], "riskcert.validate.v1");
    assert_eq!(summary["nominal_coverage"], 0.8);
    let covered = summary["covered"].as_u64().unwrap();
    let realizations = summary["realizations"].as_u64().unwrap();
    assert_eq!(realizations, 60);
    let truth = summary["truth_estimate"].as_f64().unwrap();
    let empirical = summary["empirical_coverage"].as_f64().unwrap();
    assert_eq!(empirical, covered as f64 / realizations as f64);

    // The summary on stdout is the same bytes as summary.json.
    assert_eq!(std::fs::read(out_dir.join("summary.json")).unwrap(), out.stdout);

    // bounds.csv: one row per realization; its covers column recounts the
    // summary's covered total.
    let bounds_csv = std::fs::read_to_string(out_dir.join(summary["bounds_csv"].as_str().unwrap()))
        .unwrap();
    let mut rows = bounds_csv.lines();
    assert_eq!(
        rows.next().unwrap(),
        "realization,seed_base,bound,k_index,epsilon,defaulted,covers"
    );
    let mut covers_sum = 0u64;
    let mut recounted = 0u64;
    let mut row_count = 0u64;
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 7);
        covers_sum += (fields[6] == "1") as u64;
        recounted += (fields[2].parse::<f64>().unwrap() >= truth) as u64;
        row_count += 1;
    }
    assert_eq!(row_count, realizations);
    assert_eq!(covers_sum, covered);
    assert_eq!(recounted, covered, "covers flags must mean bound >= truth estimate");

    // bound_histogram.csv: the truth estimate is injected as a bin edge, so
    // counting mass at or above it reproduces the covered total exactly.
    let hist_csv = std::fs::read_to_string(
        out_dir.join(summary["bound_histogram_csv"].as_str().unwrap()),
    )
    .unwrap();
    let mut hist_rows = hist_csv.lines();
    assert_eq!(hist_rows.next().unwrap(), "bin_lo,bin_hi,count");
    let mut total = 0u64;
    let mut at_or_above = 0u64;
    for row in hist_rows {
        let fields: Vec<&str> = row.split(',').collect();
        let lo = fields[0].parse::<f64>().unwrap();
        let count = fields[2].parse::<u64>().unwrap();
        total += count;
        if lo >= truth {
            at_or_above += count;
        }
    }
    assert_eq!(total, realizations);
    assert_eq!(at_or_above, covered, "histogram mass above the injected edge must equal covered");
}

const SENSITIVITY_CVAR_CONFIG: &str = r#"
config_version = 1
seed = 21
n = 100
realizations = 40
reference_rollouts = 400
[environment.direct_distribution]
[policy]
source = "zero"
[measure]
kind = "cvar"
tau = 0.7
delta = 0.2
[[sweep]]
offset = 0.0
alpha = 0.0
"#;

#[test]
fn sensitivity_with_zero_budget_keeps_the_nominal_rate() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, SENSITIVITY_CVAR_CONFIG).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sensitivity",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["schema"], "riskcert.sensitivity.v1");
    let case = &summary["cases"][0];
    assert_eq!(case["alpha"], 0.0);
    // No shift budget spends no confidence: the degraded rate is delta itself.
    assert_eq!(case["delta_true_theoretical"], 0.2);
    assert_eq!(case["min_confidence"], 0.8);
    assert!(out_dir.join(summary["csv"].as_str().unwrap()).exists());
}
