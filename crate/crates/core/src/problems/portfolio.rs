use std::sync::Arc;

use super::{estimate_sigmas, DomainSpec, InnerOracle, OracleConstants, OracleSample, OuterFunction, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{dot, DenseMatrix, NoiseSpec, Point, RngState};

#[derive(Clone, Debug, PartialEq)]
pub struct PortfolioParams {
    pub assets: usize,
    pub alpha: f64,
    /// Number of return scenarios `n`.
    pub horizon: usize,
    pub noise: NoiseSpec,
    /// Bounds of the threshold variable `y₀`.
    pub lo: f64,
    pub hi: f64,
}

impl PortfolioParams {
    /// 50 assets, `α = 0.95`, 100 scenarios.
    pub fn standard() -> Self {
        PortfolioParams {
            assets: 50,
            alpha: 0.95,
            horizon: 100,
            noise: NoiseSpec::symmetric_pareto(0.01, 2.0),
            lo: -1.0,
            hi: 1.0,
        }
    }
}

/// Scenario losses relative to a threshold: `f_t([x, y₀]) = −r_tᵀx − y₀`.
///
/// Queries perturb every scenario return with fresh noise.
#[derive(Clone, Debug)]
pub struct CvarPortfolio {
    returns: DenseMatrix,
    noise: NoiseSpec,
    constants: OracleConstants,
}

impl CvarPortfolio {
    pub fn new(returns: DenseMatrix, domain: &DomainSpec, noise: NoiseSpec, rng: &mut RngState) -> Result<Self> {
        noise.validate()?;
        let n = returns.rows() as f64;
        let g = (returns.frobenius_norm().powi(2) + n).sqrt();
        let mut oracle = CvarPortfolio {
            returns,
            noise,
            constants: OracleConstants {
                smoothness: 0.0,
                jacobian_lipschitz: 0.0,
                g_bound: Some(g),
                sigma_f: 0.0,
                sigma_g: 0.0,
                sigma_h: Some(0.0),
                moment_order: noise.moment_order,
            },
        };
        if !noise.is_none() {
            let (sf, sg) = estimate_sigmas(&oracle, domain, noise.moment_order, 10, 200, rng);
            oracle.constants.sigma_f = sf;
            oracle.constants.sigma_g = sg;
        }
        Ok(oracle)
    }

    pub fn returns(&self) -> &DenseMatrix {
        &self.returns
    }

    fn evaluate(&self, returns: &DenseMatrix, x: &Point) -> OracleSample {
        let d = returns.cols();
        let (w, y0) = (&x.as_slice()[..d], x[d]);
        let n = returns.rows();
        let mut jac = DenseMatrix::zeros(n, d + 1);
        let mut value = vec![0.0; n];
        for t in 0..n {
            let r = returns.row(t);
            value[t] = -dot(r, w) - y0;
            let row = jac.row_mut(t);
            for (o, v) in row[..d].iter_mut().zip(r) {
                *o = -v;
            }
            row[d] = -1.0;
        }
        OracleSample { value: Point::from_vec(value), jacobian: jac }
    }
}

impl InnerOracle for CvarPortfolio {
    fn dim_x(&self) -> usize {
        self.returns.cols() + 1
    }

    fn dim_u(&self) -> usize {
        self.returns.rows()
    }

    fn query(&self, x: &Point, rng: &mut RngState) -> OracleSample {
        if self.noise.is_none() {
            return self.evaluate(&self.returns, x);
        }
        let mut noisy = self.returns.clone();
        self.noise.perturb(noisy.as_mut_slice(), rng);
        self.evaluate(&noisy, x)
    }

    fn exact(&self, x: &Point) -> Option<OracleSample> {
        Some(self.evaluate(&self.returns, x))
    }

    fn hessian_query(&self, x: &Point, _rng: &mut RngState) -> Option<Vec<DenseMatrix>> {
        self.exact_hessian(x)
    }

    fn exact_hessian(&self, _x: &Point) -> Option<Vec<DenseMatrix>> {
        let d = self.dim_x();
        Some(vec![DenseMatrix::zeros(d, d); self.dim_u()])
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn constants(&self) -> OracleConstants {
        self.constants
    }
}

/// Minimize `y₀ + (1/((1−α)n)) Σ_t max(0, −r_tᵀx − y₀)` over the simplex times `[lo, hi]`.
///
/// Scenario returns are heavy tailed: a per-asset drift plus a per-asset
/// volatility times symmetric Pareto shocks with tail index 3.
pub fn make_cvar_portfolio(params: &PortfolioParams, rng: &mut RngState) -> Result<ProblemInstance> {
    let PortfolioParams { assets: d, alpha, horizon: n, .. } = *params;
    if d < 1 || n < 1 {
        return Err(Error::config("portfolio needs at least one asset and one scenario"));
    }
    let domain = DomainSpec::simplex_cross_interval(d, params.lo, params.hi)?;
    let outer = OuterFunction::cvar_threshold(alpha, n)?;
    let shocks = NoiseSpec::symmetric_pareto(1.0, 2.0).with_tail_index(3.0);
    let drift: Vec<f64> = (0..d).map(|_| 0.0005 + 0.001 * rng.normal()).collect();
    let vol: Vec<f64> = (0..d).map(|_| 0.01 + 0.02 * rng.uniform()).collect();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        for j in 0..d {
            data.push(drift[j] + vol[j] * shocks.sample_scalar(rng));
        }
    }
    let returns = DenseMatrix::from_row_major(n, d, data)?;
    let oracle = CvarPortfolio::new(returns, &domain, params.noise, rng)?;
    ProblemInstance::new(Arc::new(oracle), outer, domain, format!("cvar_portfolio(d={d}, n={n})"))
}
