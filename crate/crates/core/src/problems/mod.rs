//! Problem instances: a stochastic inner oracle, an outer function and a domain.

mod completion;
mod domain;
mod libsvm;
mod minimax;
mod outer;
mod portfolio;
mod quadratic;

use std::fmt;
use std::sync::Arc;

pub use completion::{make_matrix_completion, CompletionParams, MatrixCompletion};
pub use domain::DomainSpec;
pub use libsvm::{load_libsvm, parse_libsvm, to_libsvm_string};
pub use minimax::{make_minimax_regression, MinimaxParams, MinimaxRegression};
pub use outer::{cvar_lipschitz_bound, cvar_value, OuterFunction, OuterKind, Regularizer};
pub use portfolio::{make_cvar_portfolio, CvarPortfolio, PortfolioParams};
pub use quadratic::{make_custom_quadratic, QuadraticFamily, QuadraticParams};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Point, RngState};

/// One oracle answer: `(f̃(x; ξ), ∇f̃(x; ξ))`, or the exact pair.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSample {
    pub value: Point,
    pub jacobian: DenseMatrix,
}

/// Regularity and noise constants of an inner map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConstants {
    /// Largest gradient-Lipschitz constant over the components.
    pub smoothness: f64,
    /// Lipschitz constant of `x ↦ ∇f(x)` in the Frobenius norm.
    pub jacobian_lipschitz: f64,
    /// Bound on `‖∇f(x)‖_F` over the domain, when known.
    pub g_bound: Option<f64>,
    pub sigma_f: f64,
    pub sigma_g: f64,
    /// Hessian noise level, for oracles that expose Hessians.
    pub sigma_h: Option<f64>,
    pub moment_order: f64,
}

/// Stochastic first-order access to `f: ℝ^d → ℝ^n`.
///
/// `query` consumes randomness only from the supplied stream, so cloning the
/// stream and querying two points replays the same sample `ξ` at both.
pub trait InnerOracle: Send + Sync + fmt::Debug {
    fn dim_x(&self) -> usize;
    fn dim_u(&self) -> usize;
    fn query(&self, x: &Point, rng: &mut RngState) -> OracleSample;
    fn exact(&self, x: &Point) -> Option<OracleSample>;

    /// Stochastic Hessian slices `∇²f̃_i(x; ζ)`, one `d×d` matrix per component.
    fn hessian_query(&self, _x: &Point, _rng: &mut RngState) -> Option<Vec<DenseMatrix>> {
        None
    }

    fn exact_hessian(&self, _x: &Point) -> Option<Vec<DenseMatrix>> {
        None
    }

    fn has_hessian(&self) -> bool {
        false
    }

    fn constants(&self) -> OracleConstants;
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub inner: Arc<dyn InnerOracle>,
    pub outer: OuterFunction,
    pub domain: DomainSpec,
    pub name: String,
}

impl ProblemInstance {
    pub fn new(
        inner: Arc<dyn InnerOracle>,
        outer: OuterFunction,
        domain: DomainSpec,
        name: impl Into<String>,
    ) -> Result<Self> {
        if inner.dim_u() != outer.arity {
            return Err(Error::config(format!(
                "inner map has {} components but the outer function takes {}",
                inner.dim_u(),
                outer.arity
            )));
        }
        if inner.dim_x() != domain.dim() {
            return Err(Error::config(format!(
                "inner map acts on dimension {} but the domain has dimension {}",
                inner.dim_x(),
                domain.dim()
            )));
        }
        Ok(ProblemInstance { inner, outer, domain, name: name.into() })
    }

    pub fn constants(&self) -> OracleConstants {
        self.inner.constants()
    }

    pub fn exact(&self, x: &Point) -> Result<OracleSample> {
        self.inner
            .exact(x)
            .ok_or_else(|| Error::config(format!("problem '{}' has no exact oracle", self.name)))
    }

    /// `φ(x) = F(f(x), x)` through the exact oracle.
    pub fn objective(&self, x: &Point) -> Result<f64> {
        let s = self.exact(x)?;
        Ok(self.outer.eval_point(&s.value, x))
    }

    /// `L_F · L · D_X² · √n`, the composite curvature bound.
    pub fn curvature_bound(&self) -> f64 {
        self.outer.lipschitz
            * self.constants().smoothness
            * self.domain.diameter().powi(2)
            * (self.outer.arity as f64).sqrt()
    }
}

/// Monte Carlo `(σ_f, σ_g)`: the largest `(E‖noise‖^r)^{1/r}` over sampled domain points.
pub fn estimate_sigmas(
    oracle: &dyn InnerOracle,
    domain: &DomainSpec,
    r: f64,
    points: usize,
    draws: usize,
    rng: &mut RngState,
) -> (f64, f64) {
    let mut sf: f64 = 0.0;
    let mut sg: f64 = 0.0;
    for _ in 0..points {
        let x = domain.sample_mixed(rng);
        let Some(exact) = oracle.exact(&x) else {
            return (f64::NAN, f64::NAN);
        };
        let (mut mf, mut mg) = (0.0, 0.0);
        for _ in 0..draws {
            let s = oracle.query(&x, rng);
            mf += s.value.distance(&exact.value).powf(r);
            mg += s.jacobian.sub(&exact.jacobian).frobenius_norm().powf(r);
        }
        sf = sf.max((mf / draws as f64).powf(1.0 / r));
        sg = sg.max((mg / draws as f64).powf(1.0 / r));
    }
    (sf, sg)
}

/// `1.2 ×` the largest exact Jacobian Frobenius norm over `points` sampled domain points.
pub fn estimate_g_bound(oracle: &dyn InnerOracle, domain: &DomainSpec, points: usize, rng: &mut RngState) -> Option<f64> {
    let mut g: f64 = 0.0;
    for _ in 0..points {
        let x = domain.sample_mixed(rng);
        g = g.max(oracle.exact(&x)?.jacobian.frobenius_norm());
    }
    Some(1.2 * g)
}
