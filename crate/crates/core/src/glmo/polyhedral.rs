//! One LP builder for every polyhedral domain paired with a piecewise-linear outer function.

use super::{finish, AffineSurrogate, GlmoResult};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense};
use crate::numerics::{DenseMatrix, Point};
use crate::problems::{DomainSpec, OuterFunction, OuterKind};

/// LP description of a domain: `x = T w` with `w` subject to rows and bounds.
struct DomainLp {
    n_vars: usize,
    bounds: Vec<(f64, f64)>,
    rows: Vec<(Vec<f64>, Sense, f64)>,
    /// For every coordinate of `x`, its `(column, coefficient)` terms in `w`.
    map: Vec<Vec<(usize, f64)>>,
}

fn domain_lp(domain: &DomainSpec) -> Result<DomainLp> {
    Ok(match *domain {
        DomainSpec::L1Ball { dim, tau } => DomainLp {
            n_vars: 2 * dim,
            bounds: vec![(0.0, f64::INFINITY); 2 * dim],
            rows: vec![(vec![1.0; 2 * dim], Sense::Le, tau)],
            map: (0..dim).map(|j| vec![(j, 1.0), (dim + j, -1.0)]).collect(),
        },
        DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
            let mut bounds = vec![(0.0, f64::INFINITY); simplex_dim];
            bounds.push((lo, hi));
            let mut sum = vec![1.0; simplex_dim];
            sum.push(0.0);
            DomainLp {
                n_vars: simplex_dim + 1,
                bounds,
                rows: vec![(sum, Sense::Eq, 1.0)],
                map: (0..=simplex_dim).map(|j| vec![(j, 1.0)]).collect(),
            }
        }
        DomainSpec::Box { dim, lo, hi } => DomainLp {
            n_vars: dim,
            bounds: vec![(lo, hi); dim],
            rows: Vec::new(),
            map: (0..dim).map(|j| vec![(j, 1.0)]).collect(),
        },
        DomainSpec::NuclearBall { .. } => return Err(Error::config("nuclear ball has no LP form")),
    })
}

/// Row of `V_i x` expressed in the LP's domain columns.
fn pull_back(map: &[Vec<(usize, f64)>], coeffs: &[f64], n_vars: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_vars];
    for (terms, a) in map.iter().zip(coeffs) {
        if *a == 0.0 {
            continue;
        }
        for &(col, c) in terms {
            out[col] += a * c;
        }
    }
    out
}

pub(super) fn solve(
    outer: &OuterFunction,
    domain: &DomainSpec,
    s: &AffineSurrogate,
    feas_tol: f64,
) -> Result<GlmoResult> {
    let dom = domain_lp(domain)?;
    let n = s.arity();
    let intercept = s.intercept();
    let nd = dom.n_vars;

    // Auxiliary variables appended after the domain columns.
    let (n_aux, aux_bounds): (usize, Vec<(f64, f64)>) = match outer.kind {
        OuterKind::MaxOfComponents => (1, vec![(f64::NEG_INFINITY, f64::INFINITY)]),
        OuterKind::Cvar { .. } => {
            let mut b = vec![(f64::NEG_INFINITY, f64::INFINITY)];
            b.extend(std::iter::repeat((0.0, f64::INFINITY)).take(n));
            (n + 1, b)
        }
        OuterKind::CvarThreshold { .. } | OuterKind::L1NormMean => (n, vec![(0.0, f64::INFINITY); n]),
        _ => return Err(Error::config(format!("outer {:?} is not LP-representable here", outer.kind))),
    };
    let total = nd + n_aux;
    let mut objective = vec![0.0; total];
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = dom
        .rows
        .iter()
        .map(|(r, sense, b)| {
            let mut row = r.clone();
            row.resize(total, 0.0);
            (row, *sense, *b)
        })
        .collect();

    let nf = n as f64;
    match outer.kind {
        OuterKind::MaxOfComponents => {
            objective[nd] = 1.0;
            for i in 0..n {
                let mut row = pull_back(&dom.map, s.v.row(i), nd);
                row.resize(total, 0.0);
                row[nd] = -1.0;
                rows.push((row, Sense::Le, -intercept[i]));
            }
        }
        OuterKind::Cvar { alpha } => {
            let w = 1.0 / ((1.0 - alpha) * nf);
            objective[nd] = 1.0;
            for i in 0..n {
                objective[nd + 1 + i] = w;
                let mut row = pull_back(&dom.map, s.v.row(i), nd);
                row.resize(total, 0.0);
                row[nd] = -1.0;
                row[nd + 1 + i] = -1.0;
                rows.push((row, Sense::Le, -intercept[i]));
            }
        }
        OuterKind::CvarThreshold { alpha } => {
            let w = 1.0 / ((1.0 - alpha) * nf);
            let mut last = vec![0.0; domain.dim()];
            last[domain.dim() - 1] = 1.0;
            objective[..nd].copy_from_slice(&pull_back(&dom.map, &last, nd));
            for i in 0..n {
                objective[nd + i] = w;
                let mut row = pull_back(&dom.map, s.v.row(i), nd);
                row.resize(total, 0.0);
                row[nd + i] = -1.0;
                rows.push((row, Sense::Le, -intercept[i]));
            }
        }
        OuterKind::L1NormMean => {
            for i in 0..n {
                objective[nd + i] = 1.0 / nf;
                let base = pull_back(&dom.map, s.v.row(i), nd);
                let mut up = base.clone();
                up.resize(total, 0.0);
                up[nd + i] = -1.0;
                rows.push((up, Sense::Le, -intercept[i]));
                let mut down: Vec<f64> = base.iter().map(|v| -v).collect();
                down.resize(total, 0.0);
                down[nd + i] = -1.0;
                rows.push((down, Sense::Le, intercept[i]));
            }
        }
        _ => unreachable!("filtered above"),
    }

    let m = rows.len();
    let mut data = Vec::with_capacity(m * total);
    let mut rhs = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for (row, sense, b) in rows {
        data.extend(row);
        rhs.push(b);
        senses.push(sense);
    }
    let mut bounds = dom.bounds.clone();
    bounds.extend(aux_bounds);
    let constraints = if m == 0 { DenseMatrix::zeros(0, total) } else { DenseMatrix::from_row_major(m, total, data)? };
    let lp = LinearProgram { objective, constraints, rhs, senses, bounds };
    let sol = solve_lp(&lp, feas_tol)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Oracle {
            message: format!("GLMO linear program ended with status {:?}", sol.status),
            residual: f64::NAN,
        });
    }
    let w = sol.x.expect("optimal solutions carry a point");
    let x: Vec<f64> = dom
        .map
        .iter()
        .map(|terms| terms.iter().map(|&(col, c)| c * w[col]).sum())
        .collect();
    Ok(finish(outer, s, Point::from_vec(x), 0))
}
