use crate::error::{Error, Result};
use crate::numerics::Point;

/// Regularizer `Ξ(x)` of an additive composite outer function `u + Ξ(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    Zero,
    L1Penalty { lambda: f64 },
}

impl Regularizer {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Regularizer::Zero => 0.0,
            Regularizer::L1Penalty { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OuterKind {
    /// `max_i u_i`.
    MaxOfComponents,
    /// `inf_τ τ + (1/((1−α)n)) Σ max(0, u_t − τ)`, evaluated in closed form.
    Cvar { alpha: f64 },
    /// `x_last + (1/((1−α)n)) Σ max(0, u_t)`: the threshold is the last
    /// decision coordinate and the inner map already subtracts it.
    CvarThreshold { alpha: f64 },
    /// `(1/n) Σ |u_i|`.
    L1NormMean,
    /// `u_1 + Ξ(x)`, arity 1.
    AdditiveComposite(Regularizer),
    /// `u_1`.
    LinearFirstComponent,
}

/// Deterministic outer function `F(u, x)` with its Lipschitz constant in `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterFunction {
    pub kind: OuterKind,
    pub arity: usize,
    pub lipschitz: f64,
}

/// `1/(p·√n)`: Lipschitz bound of a CVaR average over a tail of mass fraction `p`.
pub fn cvar_lipschitz_bound(tail_fraction: f64, n: usize) -> f64 {
    1.0 / (tail_fraction * (n as f64).sqrt())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("CVaR level must lie in (0, 1), got {alpha}")))
    }
}

fn check_arity(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::config("outer function needs at least one component"))
    } else {
        Ok(())
    }
}

impl OuterFunction {
    pub fn max_of_components(n: usize) -> Result<Self> {
        check_arity(n)?;
        Ok(OuterFunction { kind: OuterKind::MaxOfComponents, arity: n, lipschitz: 1.0 })
    }

    pub fn cvar(alpha: f64, n: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_arity(n)?;
        Ok(OuterFunction {
            kind: OuterKind::Cvar { alpha },
            arity: n,
            lipschitz: cvar_lipschitz_bound(1.0 - alpha, n),
        })
    }

    pub fn cvar_threshold(alpha: f64, n: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_arity(n)?;
        Ok(OuterFunction {
            kind: OuterKind::CvarThreshold { alpha },
            arity: n,
            lipschitz: cvar_lipschitz_bound(1.0 - alpha, n),
        })
    }

    pub fn l1_norm_mean(n: usize) -> Result<Self> {
        check_arity(n)?;
        Ok(OuterFunction {
            kind: OuterKind::L1NormMean,
            arity: n,
            lipschitz: 1.0 / (n as f64).sqrt(),
        })
    }

    pub fn additive_composite(reg: Regularizer) -> Result<Self> {
        if let Regularizer::L1Penalty { lambda } = reg {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Error::config(format!("l1 penalty must be >= 0, got {lambda}")));
            }
        }
        Ok(OuterFunction { kind: OuterKind::AdditiveComposite(reg), arity: 1, lipschitz: 1.0 })
    }

    pub fn linear_first_component(n: usize) -> Result<Self> {
        check_arity(n)?;
        Ok(OuterFunction { kind: OuterKind::LinearFirstComponent, arity: n, lipschitz: 1.0 })
    }

    /// `F(u, x)`.
    pub fn eval(&self, u: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.arity);
        let n = u.len() as f64;
        match self.kind {
            OuterKind::MaxOfComponents => u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            OuterKind::Cvar { alpha } => cvar_value(u, alpha),
            OuterKind::CvarThreshold { alpha } => {
                let hinge: f64 = u.iter().map(|v| v.max(0.0)).sum();
                x[x.len() - 1] + hinge / ((1.0 - alpha) * n)
            }
            OuterKind::L1NormMean => u.iter().map(|v| v.abs()).sum::<f64>() / n,
            OuterKind::AdditiveComposite(reg) => u[0] + reg.eval(x),
            OuterKind::LinearFirstComponent => u[0],
        }
    }

    pub fn eval_point(&self, u: &Point, x: &Point) -> f64 {
        self.eval(u.as_slice(), x.as_slice())
    }
}

/// Closed-form CVaR: average of the largest `(1−α)n` losses, fractional
/// last term included. The minimizing threshold is the empirical α-quantile.
pub fn cvar_value(u: &[f64], alpha: f64) -> f64 {
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mass = (1.0 - alpha) * sorted.len() as f64;
    let whole = (mass.floor() as usize).min(sorted.len());
    let mut acc: f64 = sorted[..whole].iter().sum();
    let frac = mass - whole as f64;
    if frac > 0.0 && whole < sorted.len() {
        acc += frac * sorted[whole];
    }
    acc / mass
}
