use std::sync::Arc;

use rand::seq::index::sample;

use super::{DomainSpec, InnerOracle, OracleConstants, OracleSample, OuterFunction, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{nuclear_norm, DenseMatrix, NoiseSpec, Point, RngState};

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionParams {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub density: f64,
    /// Nuclear-ball radius; `None` uses `√rank · ‖M‖_F`, which contains `M`.
    pub tau: Option<f64>,
    pub noise: NoiseSpec,
}

impl CompletionParams {
    /// 30×20, rank 5, 30% of entries observed, Laplace noise.
    pub fn standard() -> Self {
        CompletionParams {
            rows: 30,
            cols: 20,
            rank: 5,
            density: 0.3,
            tau: None,
            noise: NoiseSpec::laplace(0.5),
        }
    }
}

/// `f_{(i,j)}(X) = X_{ij} − M_{ij}` over the observed set `Ω`.
///
/// Queries report `X_{ij} − (M_{ij} + ε)` with fresh noise; the Jacobian is a
/// constant selection matrix.
#[derive(Clone, Debug)]
pub struct MatrixCompletion {
    rows: usize,
    cols: usize,
    truth: DenseMatrix,
    observed: Vec<(usize, usize)>,
    selector: DenseMatrix,
    noise: NoiseSpec,
    constants: OracleConstants,
}

impl MatrixCompletion {
    pub fn new(truth: DenseMatrix, observed: Vec<(usize, usize)>, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        if observed.is_empty() {
            return Err(Error::config("observation set is empty"));
        }
        let (rows, cols) = (truth.rows(), truth.cols());
        if observed.iter().any(|&(i, j)| i >= rows || j >= cols) {
            return Err(Error::config("observed index outside the matrix"));
        }
        let mut selector = DenseMatrix::zeros(observed.len(), rows * cols);
        for (t, &(i, j)) in observed.iter().enumerate() {
            selector[(t, i * cols + j)] = 1.0;
        }
        let n = observed.len() as f64;
        let sigma_f = noise.entry_variance().map_or(f64::INFINITY, |v| (v * n).sqrt());
        Ok(MatrixCompletion {
            rows,
            cols,
            truth,
            observed,
            selector,
            noise,
            constants: OracleConstants {
                smoothness: 0.0,
                jacobian_lipschitz: 0.0,
                g_bound: Some(n.sqrt()),
                sigma_f,
                sigma_g: 0.0,
                sigma_h: Some(0.0),
                moment_order: noise.moment_order,
            },
        })
    }

    pub fn truth(&self) -> &DenseMatrix {
        &self.truth
    }

    pub fn observed(&self) -> &[(usize, usize)] {
        &self.observed
    }

    fn residuals(&self, x: &Point) -> Vec<f64> {
        self.observed
            .iter()
            .map(|&(i, j)| x[i * self.cols + j] - self.truth[(i, j)])
            .collect()
    }
}

impl InnerOracle for MatrixCompletion {
    fn dim_x(&self) -> usize {
        self.rows * self.cols
    }

    fn dim_u(&self) -> usize {
        self.observed.len()
    }

    fn query(&self, x: &Point, rng: &mut RngState) -> OracleSample {
        let mut value = self.residuals(x);
        for v in value.iter_mut() {
            *v -= self.noise.sample_scalar(rng);
        }
        OracleSample { value: Point::from_vec(value), jacobian: self.selector.clone() }
    }

    fn exact(&self, x: &Point) -> Option<OracleSample> {
        Some(OracleSample { value: Point::from_vec(self.residuals(x)), jacobian: self.selector.clone() })
    }

    fn constants(&self) -> OracleConstants {
        self.constants
    }
}

/// Robust completion: `min_{‖X‖_* ≤ τ} (1/|Ω|) Σ_{(i,j)∈Ω} |X_{ij} − M_{ij}|` with `M = PQᵀ`.
pub fn make_matrix_completion(params: &CompletionParams, rng: &mut RngState) -> Result<ProblemInstance> {
    let CompletionParams { rows, cols, rank, density, .. } = *params;
    if rows == 0 || cols == 0 || rank == 0 || rank > rows.min(cols) {
        return Err(Error::config(format!("invalid completion shape {rows}x{cols} rank {rank}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::config(format!("density must lie in (0, 1], got {density}")));
    }
    let p = DenseMatrix::from_row_major(rows, rank, rng.normal_vec(rows * rank))?;
    let q = DenseMatrix::from_row_major(cols, rank, rng.normal_vec(cols * rank))?;
    let truth = p.matmul(&q.transpose());
    let total = rows * cols;
    let count = (density * total as f64).round() as usize;
    if count == 0 {
        return Err(Error::config("density yields an empty observation set"));
    }
    let mut flat: Vec<usize> = sample(rng, total, count).into_vec();
    flat.sort_unstable();
    let observed: Vec<(usize, usize)> = flat.into_iter().map(|k| (k / cols, k % cols)).collect();
    let tau = params.tau.unwrap_or_else(|| (rank as f64).sqrt() * truth.frobenius_norm());
    debug_assert!(nuclear_norm(&truth) <= tau * (1.0 + 1e-9));
    let domain = DomainSpec::nuclear_ball(rows, cols, tau)?;
    let oracle = MatrixCompletion::new(truth, observed, params.noise)?;
    let n = oracle.dim_u();
    ProblemInstance::new(
        Arc::new(oracle),
        OuterFunction::l1_norm_mean(n)?,
        domain,
        format!("matrix_completion({rows}x{cols}, rank {rank})"),
    )
}
