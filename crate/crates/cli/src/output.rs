//! CSV schemas for traces, aggregates, rate fits and failures.
//!
//! Reals are written in Rust's shortest round-trip form, so a trace read
//! back parses to the same bits. Missing values are empty fields.

use std::path::Path;

use anyhow::{bail, Context, Result};
use compfw_core::TraceRow;

pub const TRACE_HEADER: [&str; 8] =
    ["k", "objective", "gap", "gap_running_min", "delta_g_norm", "delta_f_norm", "glmo_inner_iters", "elapsed_ns"];

pub const AGGREGATE_HEADER: [&str; 8] =
    ["algorithm", "K", "seeds", "failures", "median_min_gap", "mean_min_gap", "se_min_gap", "min_of_mean_gap"];

pub const RATES_HEADER: [&str; 7] = ["algorithm", "estimator", "slope", "intercept", "r_squared", "points", "status"];

pub const FAILURES_HEADER: [&str; 4] = ["algorithm", "K", "seed", "error"];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.objective.to_string(),
            r.gap.to_string(),
            r.gap_running_min.to_string(),
            opt(r.delta_g_norm),
            opt(r.delta_f_norm),
            r.glmo_inner_iters.to_string(),
            r.elapsed_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    if rd.headers()?.iter().ne(TRACE_HEADER) {
        bail!("{} does not have the trace header", path.display());
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse::<f64>()?) };
        let o = |i: usize| -> Result<Option<f64>> {
            Ok(if rec[i].is_empty() { None } else { Some(rec[i].parse::<f64>()?) })
        };
        rows.push(TraceRow {
            k: rec[0].parse()?,
            objective: f(1)?,
            gap: f(2)?,
            gap_running_min: f(3)?,
            delta_g_norm: o(4)?,
            delta_f_norm: o(5)?,
            glmo_inner_iters: rec[6].parse()?,
            elapsed_ns: rec[7].parse()?,
        });
    }
    Ok(rows)
}

/// One row of `aggregate.csv`: statistics of the per-seed min-gap.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub horizon: usize,
    pub seeds: usize,
    pub failures: usize,
    pub median_min_gap: Option<f64>,
    pub mean_min_gap: Option<f64>,
    pub se_min_gap: Option<f64>,
    /// Min over recorded `k ≥ 1` of the seed-mean clamped gap.
    pub min_of_mean_gap: Option<f64>,
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.horizon.to_string(),
            r.seeds.to_string(),
            r.failures.to_string(),
            opt(r.median_min_gap),
            opt(r.mean_min_gap),
            opt(r.se_min_gap),
            opt(r.min_of_mean_gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    if rd.headers()?.iter().ne(AGGREGATE_HEADER) {
        bail!("{} does not have the aggregate header", path.display());
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let o = |i: usize| -> Result<Option<f64>> {
            Ok(if rec[i].is_empty() { None } else { Some(rec[i].parse::<f64>()?) })
        };
        out.push(AggregateRow {
            algorithm: rec[0].to_string(),
            horizon: rec[1].parse()?,
            seeds: rec[2].parse()?,
            failures: rec[3].parse()?,
            median_min_gap: o(4)?,
            mean_min_gap: o(5)?,
            se_min_gap: o(6)?,
            min_of_mean_gap: o(7)?,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub algorithm: String,
    pub estimator: &'static str,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub points: usize,
    /// `ok`, or why no fit was produced.
    pub status: String,
}

pub fn write_rates(path: &Path, rows: &[RateRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RATES_HEADER)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.estimator.to_string(),
            opt(r.slope),
            opt(r.intercept),
            opt(r.r_squared),
            r.points.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureRow {
    pub algorithm: String,
    pub horizon: usize,
    pub seed: u64,
    pub error: String,
}

pub fn write_failures(path: &Path, rows: &[FailureRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(FAILURES_HEADER)?;
    for r in rows {
        w.write_record([r.algorithm.clone(), r.horizon.to_string(), r.seed.to_string(), r.error.clone()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trips_bit_for_bit() {
        let rows = vec![
            TraceRow {
                k: 0,
                objective: 0.1 + 0.2,
                gap: -1e-17,
                gap_running_min: 0.0,
                delta_g_norm: Some(1.0 / 3.0),
                delta_f_norm: Some(2.5e-300),
                glmo_inner_iters: 0,
                elapsed_ns: 0,
            },
            TraceRow {
                k: 7,
                objective: 1e10,
                gap: 0.5,
                gap_running_min: 0.5,
                delta_g_norm: None,
                delta_f_norm: None,
                glmo_inner_iters: 200,
                elapsed_ns: 12,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trace(&p, &rows).unwrap();
        assert_eq!(read_trace(&p).unwrap(), rows);
    }
}
