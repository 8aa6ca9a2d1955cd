//! Auxiliary inequalities on random instances and the r = 2 martingale equality.

use anyhow::Result;
use compfw_core::{NoiseSpec, RngState};
use compfw_core::numerics::{norm2, sample_noise_vector};

use super::Outcome;

const INSTANCES: usize = 10_000;

/// `lhs ≤ rhs` up to relative rounding.
fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + 1e-12) + 1e-300
}

/// Entries with a random scale spanning several decades.
fn spread(rng: &mut RngState) -> f64 {
    10f64.powf(4.0 * rng.uniform() - 2.0)
}

fn norm_power_convexity(rng: &mut RngState) -> usize {
    let mut fails = 0;
    for t in 0..INSTANCES {
        let s = if t % 2 == 0 { 1.5 } else { 2.0 };
        let (m, d) = (1 + rng.index(6), 1 + rng.index(5));
        let vecs: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let c = spread(rng);
                rng.normal_vec(d).into_iter().map(|v| c * v).collect()
            })
            .collect();
        let sum: Vec<f64> = (0..d).map(|j| vecs.iter().map(|v| v[j]).sum()).collect();
        let lhs = norm2(&sum).powf(s);
        let rhs = (m as f64).powf(s - 1.0) * vecs.iter().map(|v| norm2(v).powf(s)).sum::<f64>();
        fails += usize::from(!holds(lhs, rhs));
    }
    fails
}

fn root_subadditivity(rng: &mut RngState) -> usize {
    let mut fails = 0;
    for _ in 0..INSTANCES {
        let s = 1.0 + 3.0 * rng.uniform();
        let a: Vec<f64> = (0..1 + rng.index(6)).map(|_| rng.uniform() * spread(rng)).collect();
        let lhs = a.iter().sum::<f64>().powf(1.0 / s);
        let rhs: f64 = a.iter().map(|v| v.powf(1.0 / s)).sum();
        fails += usize::from(!holds(lhs, rhs));
    }
    fails
}

fn weighted_jensen(rng: &mut RngState) -> usize {
    let mut fails = 0;
    for _ in 0..INSTANCES {
        let s = 1.0 + 3.0 * rng.uniform();
        let m = 1 + rng.index(6);
        let raw: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
        // total weight uniform in (0, 1]
        let total = rng.uniform_open();
        let sum: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| total * v / sum.max(f64::MIN_POSITIVE)).collect();
        let a: Vec<f64> = (0..m).map(|_| rng.uniform() * spread(rng)).collect();
        let lhs = w.iter().zip(&a).map(|(w, a)| w * a).sum::<f64>().powf(s);
        let rhs: f64 = w.iter().zip(&a).map(|(w, a)| w * a.powf(s)).sum();
        fails += usize::from(!holds(lhs, rhs));
    }
    fails
}

/// Mean and standard error of `‖ΣX_i‖² − Σ‖X_i‖²` for i.i.d. zero-mean Laplace vectors.
fn martingale_equality(rng: &mut RngState) -> Result<(f64, f64, f64, f64)> {
    let (k, d) = (5, 3);
    let spec = NoiseSpec::laplace(1.0);
    let (mut s1, mut s2, mut lhs_acc, mut rhs_acc) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..INSTANCES {
        let xs = (0..k).map(|_| sample_noise_vector(&spec, d, rng)).collect::<compfw_core::Result<Vec<_>>>()?;
        let mut total = vec![0.0; d];
        let mut sq = 0.0;
        for x in &xs {
            for (t, v) in total.iter_mut().zip(x.iter()) {
                *t += v;
            }
            sq += x.norm().powi(2);
        }
        let lhs = norm2(&total).powi(2);
        let diff = lhs - sq;
        s1 += diff;
        s2 += diff * diff;
        lhs_acc += lhs;
        rhs_acc += sq;
    }
    let n = INSTANCES as f64;
    let mean = s1 / n;
    let se = ((s2 / n - mean * mean) / (n - 1.0)).sqrt();
    Ok((mean, se, lhs_acc / n, rhs_acc / n))
}

pub(super) fn inequality_suite() -> Result<Outcome> {
    let mut rng = RngState::new(909);
    let a1 = norm_power_convexity(&mut rng);
    let a2 = root_subadditivity(&mut rng);
    let a3 = weighted_jensen(&mut rng);
    let (mean, se, lhs, rhs) = martingale_equality(&mut rng)?;
    let vbe_ok = mean.abs() <= 3.0 * se;
    Ok(Outcome {
        passed: a1 == 0 && a2 == 0 && a3 == 0 && vbe_ok,
        measured: format!(
            "violations over {INSTANCES} each: norm-power {a1}, root-subadditivity {a2}, weighted Jensen {a3}; \
             E|sum X|^2={lhs:.4} vs sum E|X|^2={rhs:.4}, diff {mean:.4} within 3 SE ({:.4}) {vbe_ok}",
            3.0 * se
        ),
    })
}
