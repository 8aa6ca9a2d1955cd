use std::fs;
use std::path::Path;
use std::process::Command;

use compfw_cli::config::ExperimentConfig;
use compfw_cli::experiment::{median, min_of_mean_gap, run_experiment, trace_path};
use compfw_cli::output::{read_aggregate, read_trace};
use compfw_core::{RunRecord, TraceRow};

const BIN: &str = env!("CARGO_BIN_EXE_compfw");

fn config(dir: &Path, body: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(body).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

const SINGLE: &str = r#"
task = "minimax_regression"
K_grid = [16]
seeds = [1]

[[algorithms]]
variant = "variant2"
"#;

#[test]
fn one_cell_gives_one_trace_and_one_aggregate_row() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = run_experiment(&config(tmp.path(), SINGLE), 1).unwrap();
    assert_eq!(summary.failures(), 0);
    let traces: Vec<_> = fs::read_dir(tmp.path().join("traces")).unwrap().collect();
    assert_eq!(traces.len(), 1);
    assert_eq!(read_aggregate(&tmp.path().join("aggregate.csv")).unwrap().len(), 1);
    let rows = read_trace(&trace_path(tmp.path(), "variant2", 16, 1)).unwrap();
    assert_eq!(rows.len(), 17);
    let failures = fs::read_to_string(tmp.path().join("failures.csv")).unwrap();
    assert_eq!(failures.lines().count(), 1, "header only");
}

fn as_record(rows: Vec<TraceRow>) -> RunRecord {
    let min_gap = rows.last().unwrap().gap_running_min;
    RunRecord {
        rows,
        min_gap,
        argmin_k: 0,
        total_oracle_calls: 0,
        gap_recorded: true,
        final_point: compfw_core::Point::zeros(0),
    }
}

#[test]
fn aggregates_are_recomputable_from_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
task = "cvar_portfolio"
K_grid = [32, 64]
seeds = [4, 5, 6, 7]

[task_params]
assets = 6
horizon = 20

[[algorithms]]
variant = "variant1"

[[algorithms]]
variant = "vanilla_scfw"
"#;
    let cfg = config(tmp.path(), body);
    run_experiment(&cfg, 2).unwrap();
    let agg = read_aggregate(&tmp.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg.len(), 4);
    for row in &agg {
        let recs: Vec<RunRecord> = cfg
            .seeds
            .iter()
            .map(|&s| as_record(read_trace(&trace_path(tmp.path(), &row.algorithm, row.horizon, s)).unwrap()))
            .collect();
        let mins: Vec<f64> = recs.iter().map(|r| r.min_gap).collect();
        assert_eq!(row.median_min_gap, median(&mins));
        let refs: Vec<&RunRecord> = recs.iter().collect();
        assert_eq!(row.min_of_mean_gap, min_of_mean_gap(&refs));
    }
}

#[test]
fn binary_run_is_reproducible_and_honours_the_seed_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("exp.toml");
    fs::write(&cfg_path, SINGLE.replace("seeds = [1]", "seeds = [1, 2]")).unwrap();
    let run = |out: &str, seed: Option<&str>| {
        let mut cmd = Command::new(BIN);
        cmd.args(["run", cfg_path.to_str().unwrap(), "--jobs", "2", "--output"]).arg(tmp.path().join(out));
        match seed {
            Some(s) => cmd.env("COMPFW_SEED", s),
            None => cmd.env_remove("COMPFW_SEED"),
        };
        let status = cmd.output().unwrap().status;
        assert!(status.success());
    };
    run("a", None);
    run("b", None);
    run("c", Some("9"));
    for f in ["aggregate.csv", "rates.csv", "traces/variant2_K16_seed2.csv"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
    let overridden: Vec<_> = fs::read_dir(tmp.path().join("c/traces")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(overridden, vec!["variant2_K16_seed9.csv"]);
}

#[test]
fn binary_rejects_bad_configs_with_a_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("bad.toml");
    fs::write(&cfg_path, SINGLE.replace("K_grid = [16]", "K_grid = []")).unwrap();
    let out = Command::new(BIN).args(["run", cfg_path.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn gap_subcommand_reports_the_classical_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("q.toml");
    let body = r#"
task = "custom_quadratic"
K_grid = [1]
seeds = [1]

[task_params]
components = 1
dim = 1
eig_lo = 0.0
eig_hi = 0.0
linear_scale = 0.0
domain = "box"
outer = "linear_first"

[[algorithms]]
variant = "deterministic_basic"
"#;
    fs::write(&cfg_path, body).unwrap();
    let point = tmp.path().join("y.txt");
    fs::write(&point, "0.5\n").unwrap();
    let out = Command::new(BIN).args(["gap", cfg_path.to_str().unwrap(), point.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    // a constant map has zero gradient, so the gap vanishes everywhere
    assert!(String::from_utf8(out.stdout).unwrap().contains("gap = 0\n"));

    fs::write(&point, "0.5\n0.1\n").unwrap();
    let out = Command::new(BIN).args(["gap", cfg_path.to_str().unwrap(), point.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn momentum_variants_outpace_vanilla_on_the_small_minimax_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
task = "minimax_regression"
K_grid = [256, 512, 1024, 2048, 4096]
seeds = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]

[[algorithms]]
variant = "variant1"

[[algorithms]]
variant = "variant2"

[[algorithms]]
variant = "vanilla_scfw"

[[algorithms]]
variant = "clipped_scfw"
clip = 4.0
"#;
    let summary = run_experiment(&config(tmp.path(), body), 1).unwrap();
    assert_eq!(summary.failures(), 0);
    let slope = |name: &str| {
        summary
            .rates
            .iter()
            .find(|r| r.algorithm == name && r.estimator == "min_of_mean_gap")
            .and_then(|r| r.slope)
            .unwrap()
    };
    let vanilla = slope("vanilla_scfw");
    assert!(slope("variant1") < vanilla && slope("variant2") < vanilla, "{:?}", summary.rates);
}

#[test]
fn shipped_configs_parse_and_build() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        compfw_cli::tasks::build_problem(cfg.task, &cfg.task_params).unwrap();
    }
}
