use super::{norm2, DenseMatrix, Point, RngState};
use crate::error::{Error, Result};

const START_SEED: u64 = 0x70_77_65_72;
const STAGNATION_WINDOW: usize = 10;

#[derive(Clone, Debug)]
pub struct SingularPair {
    pub u: Point,
    pub value: f64,
    pub v: Point,
    pub iterations: usize,
}

/// Leading singular triple of `m` by power iteration on `MᵀM`.
///
/// The start vector comes from a fixed seed. Iteration stops once the
/// adjoint residual `‖Mᵀu − s·v‖` drops below `tol·s`; `u` is always
/// `Mv / s`, so `‖Mv − s·u‖` vanishes by construction.
pub fn top_singular_pair(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<SingularPair> {
    let (pair, residual) = power_iteration(m, tol, max_iter)?;
    if residual <= tol * pair.value {
        Ok(pair)
    } else {
        Err(Error::Oracle {
            message: format!("power iteration did not converge in {max_iter} iterations"),
            residual,
        })
    }
}

/// Power iteration that hands back its last iterate and adjoint residual even without convergence.
pub(crate) fn power_iteration(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<(SingularPair, f64)> {
    if !(tol > 0.0) {
        return Err(Error::config("power iteration tolerance must be positive"));
    }
    if m.frobenius_norm() == 0.0 {
        return Err(Error::contract("top singular pair of a zero matrix"));
    }
    let mut rng = RngState::new(START_SEED);
    let mut v = rng.unit_vector(m.cols());
    let mut history: Vec<f64> = Vec::with_capacity(STAGNATION_WINDOW + 1);
    let mut residual = f64::INFINITY;
    let mut last: Option<SingularPair> = None;

    for it in 0..max_iter.max(1) {
        let mv = m.matvec(&v);
        let s = norm2(&mv);
        if s == 0.0 {
            // start orthogonal to the row space
            v = rng.unit_vector(m.cols());
            history.clear();
            continue;
        }
        let u: Vec<f64> = mv.iter().map(|x| x / s).collect();
        let mtu = m.tr_matvec(&u);
        residual = mtu
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - s * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let pair = SingularPair { u: Point::from_vec(u), value: s, v: Point::from_vec(v.clone()), iterations: it + 1 };
        if residual <= tol * s {
            return Ok((pair, residual));
        }
        last = Some(pair);
        let t = norm2(&mtu);
        v = mtu.into_iter().map(|x| x / t).collect();

        history.push(residual);
        if history.len() > STAGNATION_WINDOW {
            let old = history.remove(0);
            if (old - residual).abs() <= 1e-14 * s {
                v = rng.unit_vector(m.cols());
                history.clear();
            }
        }
    }
    last.map(|p| (p, residual)).ok_or(Error::Oracle {
        message: format!("power iteration found no direction in {max_iter} iterations"),
        residual,
    })
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, unsorted.
pub(crate) fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

/// Singular values by one-sided Jacobi rotations, accurate to `ε‖m‖` even for tiny values.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    // columns of `a` are orthogonalized in place; work on the shape with fewer columns
    let a = if m.cols() <= m.rows() { m.clone() } else { m.transpose() };
    let (rows, cols) = (a.rows(), a.cols());
    let mut c: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| a[(i, j)]).collect()).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = c[p].iter().map(|v| v * v).sum();
                let beta: f64 = c[q].iter().map(|v| v * v).sum();
                let gamma: f64 = c[p].iter().zip(&c[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (c[p][i], c[q][i]);
                    c[p][i] = cs * x - sn * y;
                    c[q][i] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = c.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DenseMatrix) -> f64 {
    singular_values(m).into_iter().sum()
}

/// Largest eigenvalue magnitude of a symmetric matrix (its operator norm).
pub fn symmetric_operator_norm(a: &DenseMatrix) -> f64 {
    symmetric_eigenvalues(a)
        .into_iter()
        .fold(0.0, |acc, l| acc.max(l.abs()))
}

/// Operator (spectral) norm of an arbitrary matrix.
pub fn operator_norm(m: &DenseMatrix) -> f64 {
    let gram = if m.rows() <= m.cols() {
        m.matmul(&m.transpose())
    } else {
        m.transpose().matmul(m)
    };
    symmetric_operator_norm(&gram).sqrt()
}
