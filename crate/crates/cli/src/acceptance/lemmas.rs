//! Monte Carlo checks of the tracking-error bounds and the STORM / Hessian
//! estimator properties.

use anyhow::{bail, Context, Result};
use compfw_core::metrics::{function_tracking_rhs_polyak, function_tracking_rhs_taylor, jacobian_tracking_rhs};
use compfw_core::problems::{make_custom_quadratic, QuadraticParams};
use compfw_core::{DomainSpec, NoiseSpec, OuterFunction, ProblemInstance, RngState, RunRecord, Schedule, SolverConfig, Variant};

use super::{available_jobs, gaps_nonnegative, lowest_gap, Outcome};
use crate::experiment::{median, run_cells};

const LEMMA_SEEDS: u64 = 50;
const LEMMA_HORIZON: usize = 200;

fn runs(problem: &ProblemInstance, cfgs: Vec<SolverConfig>) -> Result<Vec<RunRecord>> {
    let labelled: Vec<(String, SolverConfig)> = cfgs.into_iter().map(|c| (c.variant.name().to_string(), c)).collect();
    run_cells(problem, &labelled, available_jobs())?
        .into_iter()
        .map(|c| c.record.map_err(|e| anyhow::anyhow!("{} seed {}: {e}", c.algorithm, c.seed)))
        .collect()
}

/// Seed-mean of `‖δ‖²` at each step; `pick` selects the Jacobian or function error.
fn second_moments(recs: &[RunRecord], pick: fn(&compfw_core::TraceRow) -> Option<f64>) -> Result<Vec<f64>> {
    let len = recs[0].rows.len();
    (0..len)
        .map(|i| {
            let mut acc = 0.0;
            for r in recs {
                let row = &r.rows[i];
                if row.k != i {
                    bail!("expected a row at every step");
                }
                acc += pick(row).map_or(f64::NAN, |v| v * v);
            }
            Ok(acc / recs.len() as f64)
        })
        .collect()
}

/// Smooth random quadratics with additive Gaussian noise of known level.
fn lemma_problem(scale: f64) -> Result<(ProblemInstance, f64, f64)> {
    let (n, d) = (3usize, 4usize);
    let noise = NoiseSpec::gaussian(scale);
    let params = QuadraticParams { value_noise: noise, jacobian_noise: noise, ..QuadraticParams::convex(n, d) };
    let p = make_custom_quadratic(&params, DomainSpec::l1_ball(d, 1.0)?, OuterFunction::max_of_components(n)?, &mut RngState::new(51))?;
    let var = noise.entry_variance().context("Gaussian noise has a variance")?;
    // independent entries: E‖e_f‖² = n·var, E‖E_g‖_F² = n·d·var
    Ok((p, (n as f64 * var).sqrt(), ((n * d) as f64 * var).sqrt()))
}

pub(super) fn tracking_lemmas() -> Result<Outcome> {
    let (p, sigma_f, sigma_g) = lemma_problem(0.5)?;
    let c = p.constants();
    let l_jac = c.jacobian_lipschitz;
    let g = c.g_bound.context("quadratic family has a Jacobian bound")?;
    let d = p.domain.diameter();
    let schedule = Schedule::nonconvex_constant(LEMMA_HORIZON, 2.0)?;
    let (gamma, beta, rho) = schedule.values(1);
    let cfgs = |v: Variant| -> Vec<SolverConfig> {
        (1..=LEMMA_SEEDS)
            .map(|s| SolverConfig::new(v, schedule.clone(), LEMMA_HORIZON, s).with_record_every(1))
            .collect()
    };
    let v1 = runs(&p, cfgs(Variant::Variant1))?;
    let v2 = runs(&p, cfgs(Variant::Variant2))?;
    let g1 = second_moments(&v1, |r| r.delta_g_norm)?;
    let f1 = second_moments(&v1, |r| r.delta_f_norm)?;
    let g2 = second_moments(&v2, |r| r.delta_g_norm)?;
    let f2 = second_moments(&v2, |r| r.delta_f_norm)?;

    let mut passed = gaps_nonnegative(lowest_gap(v1.iter().chain(&v2)));
    let mut parts = Vec::new();
    for k in [10usize, 100] {
        let jac = jacobian_tracking_rhs(2.0, k, beta, gamma, l_jac, d, sigma_g, g1[0])?;
        let pol = function_tracking_rhs_polyak(2.0, k, rho, gamma, g, d, sigma_f, f1[0])?;
        let max_jac = g2[..=k].iter().copied().fold(0.0, f64::max);
        let tay = function_tracking_rhs_taylor(2.0, k, rho, gamma, l_jac, d, sigma_f, f2[0], max_jac)?;
        for (name, lhs, rhs) in [("jacobian", g1[k], jac), ("polyak", f1[k], pol), ("taylor", f2[k], tay)] {
            passed &= lhs <= rhs;
            parts.push(format!("k={k} {name}: {lhs:.4} <= {rhs:.4}"));
        }
    }
    Ok(Outcome { passed, measured: parts.join(", ") })
}

/// Mean of the Hessian correction `H̃(y_α)(y − y')` against `∇f(y) − ∇f(y')`.
fn hessian_unbiasedness() -> Result<(bool, String)> {
    let params = QuadraticParams {
        eig_lo: -1.0,
        eig_hi: 2.0,
        cubic_scale: 1.0,
        hessian_noise: 0.5,
        ..QuadraticParams::convex(2, 3)
    };
    let p = make_custom_quadratic(&params, DomainSpec::box_domain(3, -1.0, 1.0)?, OuterFunction::max_of_components(2)?, &mut RngState::new(61))?;
    let mut rng = RngState::new(62);
    let prev = p.domain.sample_interior(&mut rng);
    let cur = p.domain.sample_interior(&mut rng);
    let step = cur.sub(&prev);
    let target = p.exact(&cur)?.jacobian.sub(&p.exact(&prev)?.jacobian);
    let draws = 10_000;
    let (n, d) = (2, 3);
    let mut sum = vec![0.0; n * d];
    let mut sumsq = vec![0.0; n * d];
    for _ in 0..draws {
        let alpha = rng.uniform();
        let y_alpha = prev.lerp(&cur, alpha);
        let h = p.inner.hessian_query(&y_alpha, &mut rng).context("family exposes Hessians")?;
        for (i, hi) in h.iter().enumerate() {
            for (j, v) in hi.matvec(step.as_slice()).into_iter().enumerate() {
                sum[i * d + j] += v;
                sumsq[i * d + j] += v * v;
            }
        }
    }
    let m = draws as f64;
    let mut worst: f64 = 0.0;
    for e in 0..n * d {
        let mean = sum[e] / m;
        let se = ((sumsq[e] / m - mean * mean).max(0.0) / (m - 1.0)).sqrt();
        worst = worst.max((mean - target.as_slice()[e]).abs() / se.max(1e-300));
    }
    Ok((worst <= 3.0, format!("(a) worst |mean - target|/SE={worst:.3} <= 3")))
}

/// `E‖∇f̃(x;ξ) − ∇f̃(y;ξ)‖² ≤ 2(σ_H² + L²)‖x − y‖²` on random pairs.
fn average_smoothness() -> Result<(bool, String)> {
    let noise = NoiseSpec::gaussian(0.3);
    let params = QuadraticParams {
        eig_lo: -1.5,
        eig_hi: 1.5,
        hessian_noise: 0.8,
        jacobian_noise: noise,
        value_noise: noise,
        ..QuadraticParams::convex(3, 4)
    };
    let p = make_custom_quadratic(&params, DomainSpec::l1_ball(4, 1.0)?, OuterFunction::max_of_components(3)?, &mut RngState::new(63))?;
    let c = p.constants();
    let sigma_h = c.sigma_h.context("family reports its Hessian noise")?;
    let bound_factor = 2.0 * (sigma_h * sigma_h + c.jacobian_lipschitz.powi(2));
    let mut rng = RngState::new(64);
    let samples = RngState::new(65);
    let (pairs, draws) = (1000u64, 200u64);
    let mut worst_ratio: f64 = 0.0;
    for pair in 0..pairs {
        let x = p.domain.sample_mixed(&mut rng);
        let y = p.domain.sample_mixed(&mut rng);
        let dist2 = x.distance(&y).powi(2);
        let mut acc = 0.0;
        for t in 0..draws {
            // one sample ξ replayed at both points
            let stream = samples.substream(pair * draws + t);
            let gx = p.inner.query(&x, &mut stream.clone()).jacobian;
            let gy = p.inner.query(&y, &mut stream.clone()).jacobian;
            acc += gx.sub(&gy).frobenius_norm().powi(2);
        }
        let lhs = acc / draws as f64;
        if dist2 > 0.0 {
            worst_ratio = worst_ratio.max(lhs / (bound_factor * dist2));
        }
    }
    Ok((worst_ratio <= 1.0, format!("(b) worst LHS/RHS over {pairs} pairs={worst_ratio:.4} <= 1")))
}

/// STORM against Variant I at a long horizon on an average-smooth task.
fn storm_improvement(fast: bool) -> Result<(bool, String, f64)> {
    let noise = NoiseSpec::gaussian(0.5);
    let params = QuadraticParams {
        eig_lo: -1.0,
        eig_hi: 2.0,
        value_noise: noise,
        jacobian_noise: noise,
        ..QuadraticParams::convex(5, 20)
    };
    let p = make_custom_quadratic(&params, DomainSpec::l1_ball(20, 2.0)?, OuterFunction::max_of_components(5)?, &mut RngState::new(65))?;
    let horizon = if fast { 1024 } else { 4096 };
    let seeds: Vec<u64> = (1..=if fast { 5 } else { 10 }).collect();
    let storm = runs(
        &p,
        seeds.iter().map(|&s| Ok(SolverConfig::new(Variant::Storm, Schedule::storm_constant(horizon, 2.0)?, horizon, s))).collect::<Result<_>>()?,
    )?;
    let v1 = runs(
        &p,
        seeds.iter().map(|&s| Ok(SolverConfig::new(Variant::Variant1, Schedule::nonconvex_constant(horizon, 2.0)?, horizon, s))).collect::<Result<_>>()?,
    )?;
    let med = |r: &[RunRecord]| median(&r.iter().map(|x| x.min_gap).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let (ms, m1) = (med(&storm), med(&v1));
    let lowest = lowest_gap(storm.iter().chain(&v1));
    Ok((ms <= m1, format!("(c) K={horizon} median min-gap storm={ms:.4} <= variant1={m1:.4}"), lowest))
}

pub(super) fn storm_and_hessian(fast: bool) -> Result<Outcome> {
    let (a_ok, a) = hessian_unbiasedness()?;
    let (b_ok, b) = average_smoothness()?;
    let (c_ok, c, lowest) = storm_improvement(fast)?;
    Ok(Outcome { passed: a_ok && b_ok && c_ok && gaps_nonnegative(lowest), measured: format!("{a}; {b}; {c}") })
}
