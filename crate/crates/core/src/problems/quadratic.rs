use std::sync::Arc;

use super::{estimate_g_bound, estimate_sigmas, DomainSpec, InnerOracle, OracleConstants, OracleSample, OuterFunction, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{dot, symmetric_operator_norm, DenseMatrix, NoiseSpec, Point, RngState};

/// Random family `f_i(x) = ½xᵀQ_ix + c_iᵀx + (1/6)Σ_j a_{ij}x_j³ + e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticParams {
    pub components: usize,
    pub dim: usize,
    /// Eigenvalues of each `Q_i` are drawn uniformly from `[eig_lo, eig_hi]`.
    pub eig_lo: f64,
    pub eig_hi: f64,
    pub linear_scale: f64,
    pub cubic_scale: f64,
    pub value_noise: NoiseSpec,
    pub jacobian_noise: NoiseSpec,
    /// Scale `s_H` of the random Hessian perturbation `±s_H P_i`, `‖P_i‖_op = 1`.
    pub hessian_noise: f64,
}

impl QuadraticParams {
    pub fn convex(components: usize, dim: usize) -> Self {
        QuadraticParams {
            components,
            dim,
            eig_lo: 0.5,
            eig_hi: 2.0,
            linear_scale: 1.0,
            cubic_scale: 0.0,
            value_noise: NoiseSpec::none(),
            jacobian_noise: NoiseSpec::none(),
            hessian_noise: 0.0,
        }
    }
}

/// Smooth test family with exactly known noise structure.
///
/// A query draws signs `η_i` and additive noises `e_f`, `E_g`; the sample is
/// `f̃_i = f_i + ½η_i s_H xᵀP_ix + e_{f,i}` with gradient
/// `∇f_i + η_i s_H P_i x + E_{g,i}`, so two-point differences under one sample
/// see only the Hessian perturbation.
#[derive(Clone, Debug)]
pub struct QuadraticFamily {
    q: Vec<DenseMatrix>,
    lin: Vec<Vec<f64>>,
    cubic: Vec<Vec<f64>>,
    offset: Vec<f64>,
    perturb: Vec<DenseMatrix>,
    value_noise: NoiseSpec,
    jacobian_noise: NoiseSpec,
    hessian_noise: f64,
    constants: OracleConstants,
}

/// Largest absolute coordinate over the domain.
fn coordinate_bound(domain: &DomainSpec) -> f64 {
    match *domain {
        DomainSpec::L1Ball { tau, .. } | DomainSpec::NuclearBall { tau, .. } => tau,
        DomainSpec::Box { lo, hi, .. } => lo.abs().max(hi.abs()),
        DomainSpec::SimplexCrossInterval { lo, hi, .. } => lo.abs().max(hi.abs()).max(1.0),
    }
}

impl QuadraticFamily {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        q: Vec<DenseMatrix>,
        lin: Vec<Vec<f64>>,
        cubic: Vec<Vec<f64>>,
        offset: Vec<f64>,
        perturb: Vec<DenseMatrix>,
        noise: (NoiseSpec, NoiseSpec, f64),
        domain: &DomainSpec,
        rng: &mut RngState,
    ) -> Result<Self> {
        let (value_noise, jacobian_noise, hessian_noise) = noise;
        value_noise.validate()?;
        jacobian_noise.validate()?;
        let n = q.len();
        let d = domain.dim();
        let shapes_ok = n >= 1
            && q.iter().all(|m| m.rows() == d && m.cols() == d)
            && lin.len() == n
            && lin.iter().all(|v| v.len() == d)
            && cubic.len() == n
            && cubic.iter().all(|v| v.len() == d)
            && offset.len() == n
            && (perturb.is_empty() || perturb.len() == n && perturb.iter().all(|m| m.rows() == d && m.cols() == d));
        if !shapes_ok {
            return Err(Error::config("inconsistent quadratic family dimensions"));
        }
        if !(hessian_noise >= 0.0) || hessian_noise > 0.0 && perturb.is_empty() {
            return Err(Error::config("Hessian noise needs perturbation directions and a scale >= 0"));
        }
        let radius = coordinate_bound(domain);
        let lips: Vec<f64> = q
            .iter()
            .zip(&cubic)
            .map(|(m, a)| symmetric_operator_norm(m) + radius * a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
            .collect();
        let moment_order = value_noise.moment_order.min(jacobian_noise.moment_order);
        let mut family = QuadraticFamily {
            q,
            lin,
            cubic,
            offset,
            perturb,
            value_noise,
            jacobian_noise,
            hessian_noise,
            constants: OracleConstants {
                smoothness: lips.iter().copied().fold(0.0, f64::max),
                jacobian_lipschitz: lips.iter().map(|v| v * v).sum::<f64>().sqrt(),
                g_bound: None,
                sigma_f: 0.0,
                sigma_g: 0.0,
                sigma_h: Some(hessian_noise * (n as f64).sqrt()),
                moment_order,
            },
        };
        family.constants.g_bound = estimate_g_bound(&family, domain, 1000, rng);
        if !family.is_deterministic() {
            let (sf, sg) = estimate_sigmas(&family, domain, moment_order, 20, 400, rng);
            family.constants.sigma_f = sf;
            family.constants.sigma_g = sg;
        }
        Ok(family)
    }

    /// `f_i(x) = ½(x − c)ᵀQ_i(x − c)`: every component vanishes at `center`.
    pub fn centered(q: Vec<DenseMatrix>, center: &[f64], domain: &DomainSpec, rng: &mut RngState) -> Result<Self> {
        let n = q.len();
        let d = center.len();
        let lin: Vec<Vec<f64>> = q.iter().map(|m| m.matvec(center).into_iter().map(|v| -v).collect()).collect();
        let offset: Vec<f64> = q.iter().map(|m| 0.5 * dot(&m.matvec(center), center)).collect();
        let none = NoiseSpec::none();
        QuadraticFamily::from_parts(q, lin, vec![vec![0.0; d]; n], offset, Vec::new(), (none, none, 0.0), domain, rng)
    }

    fn is_deterministic(&self) -> bool {
        self.value_noise.is_none() && self.jacobian_noise.is_none() && self.hessian_noise == 0.0
    }

    fn component_hessian(&self, i: usize, x: &[f64]) -> DenseMatrix {
        let mut h = self.q[i].clone();
        for (j, a) in self.cubic[i].iter().enumerate() {
            h[(j, j)] += a * x[j];
        }
        h
    }
}

impl InnerOracle for QuadraticFamily {
    fn dim_x(&self) -> usize {
        self.lin[0].len()
    }

    fn dim_u(&self) -> usize {
        self.q.len()
    }

    fn query(&self, x: &Point, rng: &mut RngState) -> OracleSample {
        let mut s = self.exact(x).expect("exact oracle always present");
        if self.is_deterministic() {
            return s;
        }
        if self.hessian_noise > 0.0 {
            for (i, p) in self.perturb.iter().enumerate() {
                let eta = rng.sign() * self.hessian_noise;
                let px = p.matvec(x.as_slice());
                s.value[i] += 0.5 * eta * dot(&px, x.as_slice());
                for (o, v) in s.jacobian.row_mut(i).iter_mut().zip(&px) {
                    *o += eta * v;
                }
            }
        }
        self.value_noise.perturb(s.value.as_mut_slice(), rng);
        self.jacobian_noise.perturb(s.jacobian.as_mut_slice(), rng);
        s
    }

    fn exact(&self, x: &Point) -> Option<OracleSample> {
        let n = self.q.len();
        let d = self.dim_x();
        let xs = x.as_slice();
        let mut value = vec![0.0; n];
        let mut jac = DenseMatrix::zeros(n, d);
        for i in 0..n {
            let qx = self.q[i].matvec(xs);
            let cube: f64 = self.cubic[i].iter().zip(xs).map(|(a, v)| a * v * v * v).sum();
            value[i] = 0.5 * dot(&qx, xs) + dot(&self.lin[i], xs) + cube / 6.0 + self.offset[i];
            for (j, o) in jac.row_mut(i).iter_mut().enumerate() {
                *o = qx[j] + self.lin[i][j] + 0.5 * self.cubic[i][j] * xs[j] * xs[j];
            }
        }
        Some(OracleSample { value: Point::from_vec(value), jacobian: jac })
    }

    fn hessian_query(&self, x: &Point, rng: &mut RngState) -> Option<Vec<DenseMatrix>> {
        let mut h = self.exact_hessian(x)?;
        if self.hessian_noise > 0.0 {
            for (hi, p) in h.iter_mut().zip(&self.perturb) {
                hi.axpy(rng.sign() * self.hessian_noise, p);
            }
        }
        Some(h)
    }

    fn exact_hessian(&self, x: &Point) -> Option<Vec<DenseMatrix>> {
        Some((0..self.q.len()).map(|i| self.component_hessian(i, x.as_slice())).collect())
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn constants(&self) -> OracleConstants {
        self.constants
    }
}

fn random_orthogonal(d: usize, rng: &mut RngState) -> DenseMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = rng.normal_vec(d);
        for c in &cols {
            let p = dot(&v, c);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= p * ci;
            }
        }
        let nrm = crate::numerics::norm2(&v);
        if nrm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    let mut m = DenseMatrix::zeros(d, d);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            m[(i, j)] = c[i];
        }
    }
    m
}

fn random_symmetric(d: usize, eig: impl Fn(&mut RngState) -> f64, rng: &mut RngState) -> DenseMatrix {
    let u = random_orthogonal(d, rng);
    let diag: Vec<f64> = (0..d).map(|_| eig(rng)).collect();
    u.matmul(&DenseMatrix::diagonal(&diag)).matmul(&u.transpose())
}

/// Draws a random family over `domain` and pairs it with `outer`.
pub fn make_custom_quadratic(
    params: &QuadraticParams,
    domain: DomainSpec,
    outer: OuterFunction,
    rng: &mut RngState,
) -> Result<ProblemInstance> {
    let QuadraticParams { components: n, dim: d, eig_lo, eig_hi, .. } = *params;
    if n == 0 || d == 0 || !(eig_lo <= eig_hi) {
        return Err(Error::config("invalid quadratic family parameters"));
    }
    if domain.dim() != d {
        return Err(Error::config("domain dimension does not match the family"));
    }
    let q: Vec<DenseMatrix> = (0..n)
        .map(|_| random_symmetric(d, |r| eig_lo + (eig_hi - eig_lo) * r.uniform(), rng))
        .collect();
    let lin: Vec<Vec<f64>> = (0..n)
        .map(|_| rng.normal_vec(d).into_iter().map(|v| v * params.linear_scale).collect())
        .collect();
    let cubic: Vec<Vec<f64>> = (0..n)
        .map(|_| rng.normal_vec(d).into_iter().map(|v| v * params.cubic_scale).collect())
        .collect();
    let offset = rng.normal_vec(n);
    let perturb: Vec<DenseMatrix> = (0..n)
        .map(|_| {
            let p = random_symmetric(d, |r| r.uniform() * 2.0 - 1.0, rng);
            let s = symmetric_operator_norm(&p);
            p.scaled(1.0 / s)
        })
        .collect();
    let family = QuadraticFamily::from_parts(
        q,
        lin,
        cubic,
        offset,
        perturb,
        (params.value_noise, params.jacobian_noise, params.hessian_noise),
        &domain,
        rng,
    )?;
    ProblemInstance::new(Arc::new(family), outer, domain, format!("custom_quadratic(n={n}, d={d})"))
}
