use std::sync::Arc;

use super::{estimate_g_bound, estimate_sigmas, DomainSpec, InnerOracle, OracleConstants, OracleSample, OuterFunction, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{dot, symmetric_operator_norm, DenseMatrix, NoiseSpec, Point, RngState};

/// Parameters of the grouped least-squares minimax task.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxParams {
    pub groups: usize,
    pub dim: usize,
    pub tau: f64,
    pub samples_per_group: usize,
    pub noise: NoiseSpec,
    /// Spread of the per-group regression targets around a shared sparse target.
    pub heterogeneity: f64,
    /// Label-noise scale per group; empty means linearly spaced in `[0.3, 3.0]`.
    pub group_noise: Vec<f64>,
    /// Tail index of symmetric-Pareto label noise; `None` gives Gaussian labels.
    pub label_tail_index: Option<f64>,
}

impl MinimaxParams {
    /// Ten groups, `d = 100`, `τ = 5`.
    pub fn standard() -> Self {
        MinimaxParams {
            groups: 10,
            dim: 100,
            tau: 5.0,
            samples_per_group: 200,
            noise: NoiseSpec::gaussian(0.5),
            heterogeneity: 3.0,
            group_noise: Vec::new(),
            label_tail_index: None,
        }
    }

    /// Five groups, `d = 20`, `τ = 2`, Gaussian oracle noise `σ = 0.5`.
    pub fn small() -> Self {
        MinimaxParams { groups: 5, dim: 20, tau: 2.0, ..MinimaxParams::standard() }
    }

    fn noise_ladder(&self) -> Vec<f64> {
        if !self.group_noise.is_empty() {
            return self.group_noise.clone();
        }
        let m = self.groups;
        (0..m)
            .map(|i| if m == 1 { 0.3 } else { 0.3 + 2.7 * i as f64 / (m - 1) as f64 })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Group {
    features: DenseMatrix,
    labels: Vec<f64>,
    /// `(1/N) AᵀA`
    gram: DenseMatrix,
    /// `(1/N) Aᵀb`
    cross: Vec<f64>,
    /// `(1/2N) bᵀb`
    offset: f64,
}

impl Group {
    fn new(features: DenseMatrix, labels: Vec<f64>) -> Self {
        let n = labels.len() as f64;
        let gram = features.transpose().matmul(&features).scaled(1.0 / n);
        let cross: Vec<f64> = features.tr_matvec(&labels).into_iter().map(|v| v / n).collect();
        let offset = 0.5 * dot(&labels, &labels) / n;
        Group { features, labels, gram, cross, offset }
    }
}

/// `f_i(x) = (1/2N_i) Σ_j (a_{ij}ᵀx − b_{ij})²`; noisy queries use one sample per group.
#[derive(Clone, Debug)]
pub struct MinimaxRegression {
    groups: Vec<Group>,
    dim: usize,
    noise: NoiseSpec,
    constants: OracleConstants,
}

impl MinimaxRegression {
    /// Builds the oracle from explicit `(A_i, b_i)` groups and estimates its constants.
    pub fn from_groups(
        data: Vec<(DenseMatrix, Vec<f64>)>,
        domain: &DomainSpec,
        noise: NoiseSpec,
        rng: &mut RngState,
    ) -> Result<Self> {
        noise.validate()?;
        if data.is_empty() {
            return Err(Error::config("minimax regression needs at least one group"));
        }
        let dim = data[0].0.cols();
        for (a, b) in &data {
            if a.cols() != dim || a.rows() != b.len() || b.is_empty() {
                return Err(Error::config("inconsistent group data"));
            }
        }
        let groups: Vec<Group> = data.into_iter().map(|(a, b)| Group::new(a, b)).collect();
        let norms: Vec<f64> = groups.iter().map(|g| symmetric_operator_norm(&g.gram)).collect();
        let sigma_h = groups
            .iter()
            .map(|g| {
                let n = g.labels.len() as f64;
                (0..g.labels.len())
                    .map(|j| {
                        let a = g.features.row(j);
                        DenseMatrix::outer(a, a).sub(&g.gram).frobenius_norm().powi(2)
                    })
                    .sum::<f64>()
                    / n
            })
            .sum::<f64>()
            .sqrt();
        let mut oracle = MinimaxRegression {
            groups,
            dim,
            noise,
            constants: OracleConstants {
                smoothness: norms.iter().copied().fold(0.0, f64::max),
                jacobian_lipschitz: norms.iter().map(|v| v * v).sum::<f64>().sqrt(),
                g_bound: None,
                sigma_f: 0.0,
                sigma_g: 0.0,
                sigma_h: Some(if noise.is_none() { 0.0 } else { sigma_h }),
                moment_order: noise.moment_order,
            },
        };
        oracle.constants.g_bound = estimate_g_bound(&oracle, domain, 1000, rng);
        if !noise.is_none() {
            let (sf, sg) = estimate_sigmas(&oracle, domain, noise.moment_order, 20, 200, rng);
            oracle.constants.sigma_f = sf;
            oracle.constants.sigma_g = sg;
        }
        Ok(oracle)
    }
}

impl InnerOracle for MinimaxRegression {
    fn dim_x(&self) -> usize {
        self.dim
    }

    fn dim_u(&self) -> usize {
        self.groups.len()
    }

    fn query(&self, x: &Point, rng: &mut RngState) -> OracleSample {
        if self.noise.is_none() {
            return self.exact(x).expect("exact oracle always present");
        }
        let m = self.groups.len();
        let mut value = vec![0.0; m];
        let mut jac = DenseMatrix::zeros(m, self.dim);
        for (i, g) in self.groups.iter().enumerate() {
            let j = rng.index(g.labels.len());
            let a = g.features.row(j);
            let res = dot(a, x.as_slice()) - g.labels[j];
            value[i] = 0.5 * res * res;
            for (o, ak) in jac.row_mut(i).iter_mut().zip(a) {
                *o = res * ak;
            }
        }
        self.noise.perturb(&mut value, rng);
        self.noise.perturb(jac.as_mut_slice(), rng);
        OracleSample { value: Point::from_vec(value), jacobian: jac }
    }

    fn exact(&self, x: &Point) -> Option<OracleSample> {
        let m = self.groups.len();
        let mut value = vec![0.0; m];
        let mut jac = DenseMatrix::zeros(m, self.dim);
        for (i, g) in self.groups.iter().enumerate() {
            let hx = g.gram.matvec(x.as_slice());
            value[i] = 0.5 * dot(&hx, x.as_slice()) - dot(&g.cross, x.as_slice()) + g.offset;
            for ((o, h), c) in jac.row_mut(i).iter_mut().zip(&hx).zip(&g.cross) {
                *o = h - c;
            }
        }
        Some(OracleSample { value: Point::from_vec(value), jacobian: jac })
    }

    fn hessian_query(&self, x: &Point, rng: &mut RngState) -> Option<Vec<DenseMatrix>> {
        if self.noise.is_none() {
            return self.exact_hessian(x);
        }
        Some(
            self.groups
                .iter()
                .map(|g| {
                    let a = g.features.row(rng.index(g.labels.len()));
                    DenseMatrix::outer(a, a)
                })
                .collect(),
        )
    }

    fn exact_hessian(&self, _x: &Point) -> Option<Vec<DenseMatrix>> {
        Some(self.groups.iter().map(|g| g.gram.clone()).collect())
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn constants(&self) -> OracleConstants {
        self.constants
    }
}

/// Grouped sparse regression: `min_{‖x‖₁ ≤ τ} max_i f_i(x)`.
///
/// Group `i` has Gaussian features and targets `a_{ij}ᵀ x_i + s_i ε_{ij}`,
/// where `x_i` is a shared sparse vector plus a group-specific perturbation
/// and `s_i` follows the label-noise ladder.
pub fn make_minimax_regression(params: &MinimaxParams, rng: &mut RngState) -> Result<ProblemInstance> {
    let MinimaxParams { groups: m, dim: d, tau, samples_per_group: n, .. } = *params;
    if m < 2 {
        return Err(Error::config("minimax regression needs at least two groups"));
    }
    if d < 1 || n < 1 {
        return Err(Error::config("dimension and samples per group must be positive"));
    }
    if !(params.heterogeneity >= 0.0) {
        return Err(Error::config("heterogeneity must be >= 0"));
    }
    let ladder = params.noise_ladder();
    if ladder.len() != m || ladder.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::config(format!("group noise ladder must have {m} nonnegative entries")));
    }
    let label_noise = |s: f64| match params.label_tail_index {
        Some(t) => NoiseSpec::symmetric_pareto(s, 2.0).with_tail_index(t),
        None => NoiseSpec::gaussian(s),
    };
    label_noise(1.0).validate()?;
    let domain = DomainSpec::l1_ball(d, tau)?;

    let support = d.min(5);
    let mut shared = vec![0.0; d];
    for _ in 0..support {
        let j = rng.index(d);
        shared[j] = rng.normal();
    }
    let data: Vec<(DenseMatrix, Vec<f64>)> = ladder
        .iter()
        .map(|&s| {
            let target: Vec<f64> = shared
                .iter()
                .map(|v| v + params.heterogeneity * rng.normal() / (d as f64).sqrt())
                .collect();
            let a = DenseMatrix::from_row_major(n, d, rng.normal_vec(n * d)).expect("positive dims");
            let eps = label_noise(s);
            let b: Vec<f64> = a.matvec(&target).into_iter().map(|v| v + eps.sample_scalar(rng)).collect();
            (a, b)
        })
        .collect();

    let oracle = MinimaxRegression::from_groups(data, &domain, params.noise, rng)?;
    ProblemInstance::new(
        Arc::new(oracle),
        OuterFunction::max_of_components(m)?,
        domain,
        format!("minimax_regression(m={m}, d={d})"),
    )
}
