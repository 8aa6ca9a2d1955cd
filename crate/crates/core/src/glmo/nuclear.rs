use super::{finish, lmo_nuclear_ball, AffineSurrogate, GlmoResult};
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Point};
use crate::problems::{DomainSpec, OuterFunction};

const INNER_LMO_TOL: f64 = 1e-8;

/// `min_{‖X‖_* ≤ τ} (1/n) Σ |l̃_i(X)|`, solved inexactly.
///
/// Runs `inner_budget` Frank–Wolfe steps (step `2/(t+2)`) on the Huber
/// smoothing with parameter `smoothing_mu`, starting from the anchor, and
/// returns the iterate with the smallest unsmoothed value. Starting at the
/// anchor keeps the result no worse than the anchor itself.
pub fn glmo_l1_nuclear(
    s: &AffineSurrogate,
    domain: &DomainSpec,
    inner_budget: usize,
    smoothing_mu: f64,
) -> Result<GlmoResult> {
    let DomainSpec::NuclearBall { rows, cols, tau } = *domain else {
        return Err(Error::config("nuclear oracle expects a nuclear-ball domain"));
    };
    if inner_budget == 0 || !(smoothing_mu > 0.0) {
        return Err(Error::config("inner budget must be >= 1 and smoothing > 0"));
    }
    let outer = OuterFunction::l1_norm_mean(s.arity())?;
    let n = s.arity() as f64;
    let c = s.intercept();
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = s.v.matvec(x);
        for (ri, ci) in r.iter_mut().zip(&c) {
            *ri += ci;
        }
        r
    };
    let h = |r: &[f64]| r.iter().map(|v| v.abs()).sum::<f64>() / n;

    let mut x = s.anchor.as_slice().to_vec();
    let mut r = residual(&x);
    let mut best = (h(&r), x.clone());
    for t in 0..inner_budget {
        let psi: Vec<f64> = r.iter().map(|v| (v / smoothing_mu).clamp(-1.0, 1.0) / n).collect();
        let grad = DenseMatrix::from_row_major(rows, cols, s.v.tr_matvec(&psi))?;
        let target = lmo_nuclear_ball(&grad, tau, INNER_LMO_TOL)?;
        let step = 2.0 / (t as f64 + 2.0);
        for (xi, ti) in x.iter_mut().zip(target.as_slice()) {
            *xi += step * (ti - *xi);
        }
        r = residual(&x);
        let val = h(&r);
        if val < best.0 {
            best = (val, x.clone());
        }
    }
    Ok(finish(&outer, s, Point::from_vec(best.1), inner_budget))
}
