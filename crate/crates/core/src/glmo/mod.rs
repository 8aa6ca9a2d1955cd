//! Generalized linear minimization oracles: `argmin_{x∈X} F(z + V(x − y), x)`.
//!
//! Polyhedral domains with piecewise-linear outer functions reduce to one
//! small LP. Linear outer functions reduce to the classical LMO. The
//! ℓ1-loss over a nuclear-norm ball has no LP form and is solved inexactly by
//! an inner Frank–Wolfe loop on a Huber smoothing.

mod nuclear;
mod polyhedral;

use crate::error::{Error, Result};
use crate::lp::DEFAULT_FEAS_TOL;
use crate::numerics::{power_iteration, DenseMatrix, Point};
use crate::problems::{DomainSpec, OuterFunction, OuterKind, Regularizer};

pub use nuclear::glmo_l1_nuclear;

/// Power-iteration settings for nuclear-ball LMOs.
pub(crate) const NUCLEAR_POWER_MAX_ITER: usize = 20_000;

/// Largest relative adjoint residual accepted from an unconverged nuclear LMO.
const NUCLEAR_ACCEPT_RESIDUAL: f64 = 1e-3;

/// The tracked linearization `l̃(x) = z + V(x − y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSurrogate {
    pub z: Point,
    pub v: DenseMatrix,
    pub anchor: Point,
}

impl AffineSurrogate {
    pub fn new(z: Point, v: DenseMatrix, anchor: Point) -> Result<Self> {
        if v.rows() != z.dim() || v.cols() != anchor.dim() {
            return Err(Error::contract(format!(
                "surrogate shapes disagree: z {}, V {}x{}, y {}",
                z.dim(),
                v.rows(),
                v.cols(),
                anchor.dim()
            )));
        }
        Ok(AffineSurrogate { z, v, anchor })
    }

    pub fn arity(&self) -> usize {
        self.z.dim()
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    /// `z + V(x − y)`.
    pub fn eval(&self, x: &[f64]) -> Point {
        let diff: Vec<f64> = x.iter().zip(self.anchor.iter()).map(|(a, b)| a - b).collect();
        let mut out = self.v.matvec(&diff);
        for (o, z) in out.iter_mut().zip(self.z.iter()) {
            *o += z;
        }
        Point::from_vec(out)
    }

    /// Constant term `c = z − V y`, so that `l̃(x) = c + V x`.
    pub fn intercept(&self) -> Vec<f64> {
        let vy = self.v.matvec(self.anchor.as_slice());
        self.z.iter().zip(vy).map(|(z, v)| z - v).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlmoParams {
    /// Inner Frank–Wolfe steps for the nuclear-ball oracle.
    pub inner_budget: usize,
    /// Huber smoothing parameter for the nuclear-ball oracle.
    pub smoothing_mu: f64,
    pub feas_tol: f64,
}

impl Default for GlmoParams {
    fn default() -> Self {
        GlmoParams { inner_budget: 200, smoothing_mu: 1e-3, feas_tol: DEFAULT_FEAS_TOL }
    }
}

impl GlmoParams {
    pub fn validate(&self) -> Result<()> {
        if self.inner_budget == 0 || !(self.smoothing_mu > 0.0) || !(self.feas_tol > 0.0) {
            return Err(Error::config(format!("invalid GLMO parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlmoResult {
    pub x_star: Point,
    /// `F(l̃(x*), x*)`.
    pub surrogate_value: f64,
    /// Inner iterations used; 0 for exact solves.
    pub inner_iterations: usize,
}

/// Dispatches to the oracle matching `(outer, domain)`.
pub fn solve_glmo(
    outer: &OuterFunction,
    domain: &DomainSpec,
    s: &AffineSurrogate,
    params: &GlmoParams,
) -> Result<GlmoResult> {
    if s.arity() != outer.arity || s.dim() != domain.dim() {
        return Err(Error::contract("surrogate does not match the problem dimensions"));
    }
    match outer.kind {
        OuterKind::LinearFirstComponent => {
            let x = domain.lmo(s.v.row(0))?;
            Ok(finish(outer, s, x, 0))
        }
        OuterKind::AdditiveComposite(reg) => glmo_composite(s, domain, reg),
        OuterKind::L1NormMean if !domain.is_polyhedral() => {
            glmo_l1_nuclear(s, domain, params.inner_budget, params.smoothing_mu)
        }
        _ if domain.is_polyhedral() => polyhedral::solve(outer, domain, s, params.feas_tol),
        _ => Err(Error::config(format!(
            "no oracle for outer {:?} over {domain:?}",
            outer.kind
        ))),
    }
}

fn finish(outer: &OuterFunction, s: &AffineSurrogate, x: Point, inner_iterations: usize) -> GlmoResult {
    let u = s.eval(x.as_slice());
    GlmoResult { surrogate_value: outer.eval(u.as_slice(), x.as_slice()), x_star: x, inner_iterations }
}

/// `min_{‖x‖₁ ≤ τ} max_i l̃_i(x)` by one LP with split variables.
pub fn glmo_max_affine(s: &AffineSurrogate, domain: &DomainSpec) -> Result<GlmoResult> {
    if !matches!(domain, DomainSpec::L1Ball { .. }) {
        return Err(Error::config("max-affine oracle expects an l1 ball"));
    }
    let outer = OuterFunction::max_of_components(s.arity())?;
    polyhedral::solve(&outer, domain, s, DEFAULT_FEAS_TOL)
}

/// CVaR oracle over the simplex times the threshold interval (threshold stored last).
pub fn glmo_cvar(s: &AffineSurrogate, domain: &DomainSpec, alpha: f64) -> Result<GlmoResult> {
    if !matches!(domain, DomainSpec::SimplexCrossInterval { .. }) {
        return Err(Error::config("CVaR oracle expects a simplex-cross-interval domain"));
    }
    let outer = OuterFunction::cvar_threshold(alpha, s.arity())?;
    polyhedral::solve(&outer, domain, s, DEFAULT_FEAS_TOL)
}

/// Classical composite oracle `argmin ⟨V₁, x⟩ + Ξ(x)`.
pub fn glmo_composite(s: &AffineSurrogate, domain: &DomainSpec, reg: Regularizer) -> Result<GlmoResult> {
    if s.arity() != 1 {
        return Err(Error::config("composite oracle needs a single inner component"));
    }
    let outer = OuterFunction::additive_composite(reg)?;
    let g = s.v.row(0);
    let x = match (reg, *domain) {
        (Regularizer::Zero, _) => domain.lmo(g)?,
        (Regularizer::L1Penalty { lambda }, DomainSpec::Box { lo, hi, .. }) => {
            let mut cands = Vec::with_capacity(3);
            if lo <= 0.0 && 0.0 <= hi {
                cands.push(0.0);
            }
            cands.push(lo);
            cands.push(hi);
            Point::from_vec(
                g.iter()
                    .map(|&gi| {
                        let mut best = cands[0];
                        let mut best_val = gi * best + lambda * best.abs();
                        for &c in &cands[1..] {
                            let v = gi * c + lambda * c.abs();
                            if v < best_val {
                                best = c;
                                best_val = v;
                            }
                        }
                        best
                    })
                    .collect(),
            )
        }
        (reg, dom) => {
            return Err(Error::config(format!("no composite oracle for {reg:?} over {dom:?}")));
        }
    };
    Ok(finish(&outer, s, x, 0))
}

/// `argmin_{‖x‖₁ ≤ τ} ⟨g, x⟩ = −τ·sign(g_{i*}) e_{i*}`, lowest index on ties, 0 for `g = 0`.
pub fn lmo_l1_ball(g: &[f64], tau: f64) -> Point {
    let mut best = 0;
    for (i, v) in g.iter().enumerate() {
        if v.abs() > g[best].abs() {
            best = i;
        }
    }
    let mut x = Point::zeros(g.len());
    if g[best] != 0.0 {
        x[best] = -tau * g[best].signum();
    }
    x
}

/// `argmin_{‖X‖_* ≤ τ} ⟨G, X⟩ = −τ u vᵀ` for the top singular pair of `G`.
///
/// The value `⟨G, −τuvᵀ⟩ = −τs` settles long before the vectors do when the
/// top two singular values nearly tie, so an unconverged last iterate is
/// accepted while its residual stays below `NUCLEAR_ACCEPT_RESIDUAL · s`.
pub fn lmo_nuclear_ball(g: &DenseMatrix, tau: f64, tol: f64) -> Result<DenseMatrix> {
    if g.frobenius_norm() == 0.0 {
        return Ok(DenseMatrix::zeros(g.rows(), g.cols()));
    }
    let (p, residual) = power_iteration(g, tol, NUCLEAR_POWER_MAX_ITER)?;
    if residual > tol * p.value {
        if residual > NUCLEAR_ACCEPT_RESIDUAL * p.value {
            return Err(Error::Oracle {
                message: format!("power iteration did not converge in {NUCLEAR_POWER_MAX_ITER} iterations"),
                residual,
            });
        }
        log::debug!("accepting unconverged top pair (residual {residual:e}, s = {})", p.value);
    }
    Ok(DenseMatrix::outer(p.u.as_slice(), p.v.as_slice()).scaled(-tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surrogate(z: Vec<f64>, v: Vec<Vec<f64>>, y: Vec<f64>) -> AffineSurrogate {
        AffineSurrogate::new(Point::from_vec(z), DenseMatrix::from_rows(&v).unwrap(), Point::from_vec(y)).unwrap()
    }

    #[test]
    fn l1_lmo_examples() {
        assert_eq!(lmo_l1_ball(&[3.0, -5.0, 1.0], 2.0).as_slice(), &[0.0, 2.0, 0.0]);
        assert_eq!(lmo_l1_ball(&[0.0, 0.0], 1.0).as_slice(), &[0.0, 0.0]);
        assert_eq!(lmo_l1_ball(&[-2.0, 2.0], 1.0).as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn nuclear_lmo_examples() {
        let x = lmo_nuclear_ball(&DenseMatrix::diagonal(&[3.0, 1.0]), 1.0, 1e-12).unwrap();
        assert!((x[(0, 0)] + 1.0).abs() < 1e-9 && x[(1, 1)].abs() < 1e-6 && x[(0, 1)].abs() < 1e-6);
        let z = lmo_nuclear_ball(&DenseMatrix::zeros(2, 3), 1.0, 1e-12).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
    }

    #[test]
    fn symmetric_max_picks_midpoint() {
        let s = surrogate(vec![0.0, 0.0], vec![vec![1.0], vec![-1.0]], vec![0.0]);
        let r = glmo_max_affine(&s, &DomainSpec::l1_ball(1, 1.0).unwrap()).unwrap();
        assert_eq!(r.x_star[0], 0.0);
        assert_eq!(r.surrogate_value, 0.0);
    }

    #[test]
    fn single_row_max_matches_lmo() {
        let s = surrogate(vec![0.7], vec![vec![0.3, -1.2, 0.5]], vec![0.1, 0.0, -0.2]);
        let dom = DomainSpec::l1_ball(3, 1.5).unwrap();
        let r = glmo_max_affine(&s, &dom).unwrap();
        let x = lmo_l1_ball(s.v.row(0), 1.5);
        assert_eq!(r.x_star, x);
    }

    #[test]
    fn cvar_inactive_hinge_pushes_threshold_low() {
        let s = surrogate(vec![-1.0; 3], vec![vec![0.0; 3]; 3], vec![0.5, 0.5, 0.0]);
        let dom = DomainSpec::simplex_cross_interval(2, -1.0, 1.0).unwrap();
        let r = glmo_cvar(&s, &dom, 0.9).unwrap();
        assert_eq!(r.x_star[2], -1.0);
        assert!((r.surrogate_value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn composite_penalty_closed_form() {
        let s = surrogate(vec![0.0], vec![vec![2.0, -0.3, -1.5]], vec![0.0; 3]);
        let dom = DomainSpec::box_domain(3, -1.0, 1.0).unwrap();
        let r = glmo_composite(&s, &dom, Regularizer::L1Penalty { lambda: 1.0 }).unwrap();
        assert_eq!(r.x_star.as_slice(), &[-1.0, 0.0, 1.0]);
        let l1 = DomainSpec::l1_ball(3, 1.0).unwrap();
        assert!(matches!(
            glmo_composite(&s, &l1, Regularizer::L1Penalty { lambda: 1.0 }),
            Err(Error::Config(_))
        ));
        let zero = glmo_composite(&s, &l1, Regularizer::Zero).unwrap();
        assert_eq!(zero.x_star, lmo_l1_ball(s.v.row(0), 1.0));
    }
}
