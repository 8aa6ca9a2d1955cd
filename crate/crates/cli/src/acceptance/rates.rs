//! Empirical rate exponent and baseline ordering on the small minimax task.

use anyhow::{bail, Result};
use compfw_core::metrics::fit_rate;
use compfw_core::{ProblemInstance, RngState, RunRecord, Schedule, SolverConfig, Variant};

use super::{available_jobs, gaps_nonnegative, lowest_gap, task_one_small, Outcome};
use crate::experiment::{median, min_of_mean_gap, run_cells};

/// Evaluation seeds; clip tuning uses a disjoint range.
fn eval_seeds(fast: bool) -> Vec<u64> {
    (1..=if fast { 5 } else { 10 }).collect()
}

const TUNING_SEEDS: [u64; 5] = [101, 102, 103, 104, 105];
const CLIP_CANDIDATES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

fn k_grid(fast: bool) -> Vec<usize> {
    if fast {
        vec![128, 256, 512, 1024]
    } else {
        vec![256, 512, 1024, 2048, 4096]
    }
}

fn config(variant: Variant, horizon: usize, seed: u64) -> Result<SolverConfig> {
    Ok(SolverConfig::new(variant, Schedule::nonconvex_constant(horizon, 2.0)?, horizon, seed))
}

/// Runs `variant` at every seed and returns the records in seed order.
fn runs(problem: &ProblemInstance, variant: Variant, horizon: usize, seeds: &[u64]) -> Result<Vec<RunRecord>> {
    let cfgs = seeds
        .iter()
        .map(|&s| Ok((variant.name().to_string(), config(variant, horizon, s)?)))
        .collect::<Result<Vec<_>>>()?;
    run_cells(problem, &cfgs, available_jobs())?
        .into_iter()
        .map(|c| c.record.map_err(|e| anyhow::anyhow!("{} K={} seed={}: {e}", c.algorithm, c.horizon, c.seed)))
        .collect()
}

/// `(K, min_k mean_seeds gap)` over the grid, plus the lowest raw gap seen.
fn rate_points(
    problem: &ProblemInstance,
    variant: Variant,
    grid: &[usize],
    seeds: &[u64],
) -> Result<(Vec<(f64, f64)>, f64, Vec<Vec<RunRecord>>)> {
    let mut pts = Vec::new();
    let mut lowest = f64::INFINITY;
    let mut all = Vec::new();
    for &k in grid {
        let recs = runs(problem, variant, k, seeds)?;
        let refs: Vec<&RunRecord> = recs.iter().collect();
        let Some(g) = min_of_mean_gap(&refs) else { bail!("records at K={k} are not aligned") };
        pts.push((k as f64, g));
        lowest = lowest.min(lowest_gap(&recs));
        all.push(recs);
    }
    Ok((pts, lowest, all))
}

fn fmt_points(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(k, g)| format!("{k}:{g:.4}")).collect::<Vec<_>>().join(" ")
}

pub(super) fn nonconvex_rate(fast: bool) -> Result<Outcome> {
    let problem = task_one_small()?;
    let (lo, hi, r2_min) = if fast { (-0.45, -0.08, 0.75) } else { (-0.40, -0.12, 0.85) };
    let (pts, lowest, _) = rate_points(&problem, Variant::Variant2, &k_grid(fast), &eval_seeds(fast))?;
    let fit = fit_rate(&pts)?;
    let passed = fit.slope >= lo && fit.slope <= hi && fit.r_squared >= r2_min && gaps_nonnegative(lowest);
    Ok(Outcome {
        passed,
        measured: format!(
            "slope={:.4} in [{lo}, {hi}], r2={:.4} >= {r2_min}, min raw gap={lowest:.2e}, points {}",
            fit.slope,
            fit.r_squared,
            fmt_points(&pts)
        ),
    })
}

fn median_min_gap(recs: &[RunRecord]) -> f64 {
    let mins: Vec<f64> = recs.iter().map(|r| r.min_gap).collect();
    median(&mins).unwrap_or(f64::NAN)
}

/// Picks the clip threshold with the lowest median min-gap on the tuning
/// seeds, among candidates below the median sampled Jacobian norm (so the
/// clip actually acts). Returns the threshold and the candidate table.
pub fn tune_clip(problem: &ProblemInstance, horizon: usize) -> Result<(f64, Vec<(f64, f64)>)> {
    let y0 = problem.domain.default_start();
    let mut rng = RngState::new(7);
    let mut norms: Vec<f64> = (0..400).map(|_| problem.inner.query(&y0, &mut rng).jacobian.frobenius_norm()).collect();
    norms.sort_by(f64::total_cmp);
    let typical = norms[norms.len() / 2];
    let mut table = Vec::new();
    for &c in CLIP_CANDIDATES.iter().filter(|&&c| c < typical) {
        let recs = runs(problem, Variant::ClippedScfw { clip: c }, horizon, &TUNING_SEEDS)?;
        table.push((c, median_min_gap(&recs)));
    }
    let Some(&(best, _)) = table.iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        bail!("no candidate threshold lies below the typical Jacobian norm {typical:.3}");
    };
    Ok((best, table))
}

pub(super) fn baseline_ordering(fast: bool) -> Result<Outcome> {
    let problem = task_one_small()?;
    let grid = k_grid(fast);
    let horizon = *grid.last().expect("nonempty grid");
    let seeds = eval_seeds(fast);
    let (clip, table) = tune_clip(&problem, horizon)?;

    let (vpts, vlow, vrecs) = rate_points(&problem, Variant::VanillaScfw, &grid, &seeds)?;
    let vfit = fit_rate(&vpts)?;
    let vanilla = median_min_gap(vrecs.last().expect("nonempty grid"));
    let v2_recs = runs(&problem, Variant::Variant2, horizon, &seeds)?;
    let clip_recs = runs(&problem, Variant::ClippedScfw { clip }, horizon, &seeds)?;
    let v2 = median_min_gap(&v2_recs);
    let clipped = median_min_gap(&clip_recs);
    let lowest = vlow.min(lowest_gap(&v2_recs)).min(lowest_gap(&clip_recs));

    let slope_band = if fast { 0.12 } else { 0.08 };
    let order_v2 = v2 <= clipped;
    let order_clip = clipped <= vanilla;
    let flat = vfit.slope.abs() <= slope_band;
    let tuning = table.iter().map(|(c, g)| format!("{c}:{g:.4}")).collect::<Vec<_>>().join(" ");
    Ok(Outcome {
        passed: order_v2 && order_clip && flat && gaps_nonnegative(lowest),
        measured: format!(
            "K={horizon}: median min-gap variant2={v2:.4} clipped(C={clip})={clipped:.4} vanilla={vanilla:.4} \
             [variant2<=clipped {order_v2}, clipped<=vanilla {order_clip}]; vanilla slope={:.4} (|.|<={slope_band} {flat}); \
             clip tuning {tuning}",
            vfit.slope
        ),
    })
}
