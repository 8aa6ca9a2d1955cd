//! Seed-replicated experiment grids.
//!
//! Every (algorithm, K, seed) cell is an independent solver run; cells run on
//! a rayon pool of `jobs` threads and are collected in grid order, so the
//! files written afterwards do not depend on the job count.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use compfw_core::metrics::fit_rate;
use compfw_core::solver::run;
use compfw_core::{ProblemInstance, RunRecord, SolverConfig};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::output::{write_aggregate, write_failures, write_rates, write_trace, AggregateRow, FailureRow, RateRow};
use crate::tasks::build_problem;

/// One grid cell and its result.
#[derive(Debug)]
pub struct Cell {
    pub algorithm: String,
    pub horizon: usize,
    pub seed: u64,
    pub record: std::result::Result<RunRecord, String>,
}

#[derive(Debug)]
pub struct ExperimentSummary {
    pub output_dir: PathBuf,
    pub cells: Vec<Cell>,
    pub aggregate: Vec<AggregateRow>,
    pub rates: Vec<RateRow>,
}

impl ExperimentSummary {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.record.is_err()).count()
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Mean and standard error (sample standard deviation over √n; 0 for one value).
pub fn mean_se(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Some((mean, (var / n as f64).sqrt()))
}

/// Min over recorded `k ≥ 1` of the seed-averaged clamped gap.
///
/// All records must share a horizon and recording interval.
pub fn min_of_mean_gap(records: &[&RunRecord]) -> Option<f64> {
    let first = records.first()?;
    if records.iter().any(|r| !r.gap_recorded || r.rows.len() != first.rows.len()) {
        return None;
    }
    let n = records.len() as f64;
    (0..first.rows.len())
        .filter(|&i| first.rows[i].k >= 1)
        .map(|i| records.iter().map(|r| r.rows[i].gap.max(0.0)).sum::<f64>() / n)
        .min_by(f64::total_cmp)
}

/// Runs `configs` in parallel on `jobs` threads; results keep the input order.
pub fn run_cells(
    problem: &ProblemInstance,
    configs: &[(String, SolverConfig)],
    jobs: usize,
) -> Result<Vec<Cell>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let y0 = problem.domain.default_start();
    Ok(pool.install(|| {
        configs
            .par_iter()
            .map(|(label, cfg)| Cell {
                algorithm: label.clone(),
                horizon: cfg.horizon,
                seed: cfg.seed,
                record: run(problem, cfg, &y0).map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

fn trace_name(algorithm: &str, horizon: usize, seed: u64) -> String {
    format!("{algorithm}_K{horizon}_seed{seed}.csv")
}

pub fn trace_path(output_dir: &Path, algorithm: &str, horizon: usize, seed: u64) -> PathBuf {
    output_dir.join("traces").join(trace_name(algorithm, horizon, seed))
}

fn aggregate(labels: &[String], k_grid: &[usize], cells: &[Cell]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for label in labels {
        for &k in k_grid {
            let group: Vec<&Cell> = cells.iter().filter(|c| &c.algorithm == label && c.horizon == k).collect();
            let ok: Vec<&RunRecord> = group
                .iter()
                .filter_map(|c| c.record.as_ref().ok())
                .filter(|r| r.gap_recorded)
                .collect();
            let mins: Vec<f64> = ok.iter().map(|r| r.min_gap).collect();
            let ms = mean_se(&mins);
            rows.push(AggregateRow {
                algorithm: label.clone(),
                horizon: k,
                seeds: group.len(),
                failures: group.iter().filter(|c| c.record.is_err()).count(),
                median_min_gap: median(&mins),
                mean_min_gap: ms.map(|m| m.0),
                se_min_gap: ms.map(|m| m.1),
                min_of_mean_gap: min_of_mean_gap(&ok),
            });
        }
    }
    rows
}

fn rate_row(algorithm: &str, estimator: &'static str, points: Vec<(f64, f64)>) -> RateRow {
    let usable = points.iter().filter(|p| p.1 > 0.0).count();
    let empty = |status: String| RateRow {
        algorithm: algorithm.to_string(),
        estimator,
        slope: None,
        intercept: None,
        r_squared: None,
        points: usable,
        status,
    };
    match fit_rate(&points) {
        Ok(fit) => RateRow {
            algorithm: algorithm.to_string(),
            estimator,
            slope: Some(fit.slope),
            intercept: Some(fit.intercept),
            r_squared: Some(fit.r_squared),
            points: fit.points.len(),
            status: "ok".to_string(),
        },
        Err(e) => empty(e.to_string().replace(',', ";")),
    }
}

fn rates(labels: &[String], agg: &[AggregateRow]) -> Vec<RateRow> {
    let mut out = Vec::new();
    for label in labels {
        let mine: Vec<&AggregateRow> = agg.iter().filter(|r| &r.algorithm == label).collect();
        let pts = |f: fn(&AggregateRow) -> Option<f64>| -> Vec<(f64, f64)> {
            mine.iter().filter_map(|r| f(r).map(|v| (r.horizon as f64, v))).collect()
        };
        out.push(rate_row(label, "min_of_mean_gap", pts(|r| r.min_of_mean_gap)));
        out.push(rate_row(label, "mean_min_gap", pts(|r| r.mean_min_gap)));
    }
    out
}

/// Runs the grid, writes every CSV under `output_dir`, and returns the summary.
///
/// Run failures are reported in `failures.csv` rather than aborting.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let problem = build_problem(cfg.task, &cfg.task_params)?;
    let labels: Vec<String> = cfg.algorithms.iter().map(|a| a.label()).collect();
    let mut grid = Vec::new();
    for a in &cfg.algorithms {
        for &k in &cfg.k_grid {
            for &seed in &cfg.seeds {
                grid.push((a.label(), a.solver_config(k, seed)?));
            }
        }
    }
    let cells = run_cells(&problem, &grid, jobs)?;

    let dir = cfg.output_dir.clone();
    fs::create_dir_all(dir.join("traces")).with_context(|| format!("creating {}", dir.display()))?;
    let mut failures = Vec::new();
    for c in &cells {
        match &c.record {
            Ok(rec) => write_trace(&trace_path(&dir, &c.algorithm, c.horizon, c.seed), &rec.rows)?,
            Err(e) => {
                log::warn!("{} K={} seed={} failed: {e}", c.algorithm, c.horizon, c.seed);
                failures.push(FailureRow { algorithm: c.algorithm.clone(), horizon: c.horizon, seed: c.seed, error: e.clone() });
            }
        }
    }
    let agg = aggregate(&labels, &cfg.k_grid, &cells);
    let rate_rows = rates(&labels, &agg);
    write_aggregate(&dir.join("aggregate.csv"), &agg)?;
    write_rates(&dir.join("rates.csv"), &rate_rows)?;
    write_failures(&dir.join("failures.csv"), &failures)?;
    Ok(ExperimentSummary { output_dir: dir, cells, aggregate: agg, rates: rate_rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_standard_error() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        // sample variance 5/3, divided by n = 4
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
