//! Exact oracles against brute force: GLMOs against grids, the LP solver
//! against vertex enumeration.

use anyhow::{bail, Result};
use compfw_core::glmo::{glmo_composite, glmo_cvar, glmo_max_affine};
use compfw_core::lp::{solve_lp, LinearProgram, LpStatus, Sense, DEFAULT_FEAS_TOL};
use compfw_core::{AffineSurrogate, DenseMatrix, DomainSpec, GlmoResult, OuterFunction, Point, Regularizer, RngState};
use nalgebra::{DMatrix, DVector};

use super::Outcome;

const INSTANCES: usize = 100;
const LPS: usize = 200;

/// Grid points of `domain` on a lattice of spacing `h`.
///
/// Rounding any feasible point toward the lattice (toward 0 in the ℓ1 ball,
/// along the simplex edge otherwise) stays feasible and moves each coordinate
/// by at most `h`, so the grid minimum is within `h·Lip_∞` of the true one.
fn grid(domain: &DomainSpec, h: f64) -> Vec<Vec<f64>> {
    let ticks = |lo: f64, hi: f64| -> Vec<f64> {
        let n = ((hi - lo) / h).round() as usize;
        (0..=n).map(|i| lo + i as f64 * h).collect()
    };
    let product = |axes: &[Vec<f64>]| -> Vec<Vec<f64>> {
        axes.iter().fold(vec![Vec::new()], |acc, axis| {
            acc.iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect()
        })
    };
    match *domain {
        DomainSpec::L1Ball { dim, tau } => product(&vec![ticks(-tau, tau); dim])
            .into_iter()
            .filter(|p| p.iter().map(|v| v.abs()).sum::<f64>() <= tau + 1e-12)
            .collect(),
        DomainSpec::Box { dim, lo, hi } => product(&vec![ticks(lo, hi); dim]),
        DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
            let weights: Vec<Vec<f64>> = match simplex_dim {
                1 => vec![vec![1.0]],
                2 => ticks(0.0, 1.0).into_iter().map(|w| vec![w, 1.0 - w]).collect(),
                _ => unreachable!("grids are only built for simplex dimension 1 or 2"),
            };
            weights
                .iter()
                .flat_map(|w| {
                    ticks(lo, hi).into_iter().map(move |t| {
                        let mut p = w.clone();
                        p.push(t);
                        p
                    })
                })
                .collect()
        }
        DomainSpec::NuclearBall { .. } => unreachable!("no grid for the nuclear ball"),
    }
}

fn random_surrogate(n: usize, d: usize, rng: &mut RngState) -> Result<AffineSurrogate> {
    let v = DenseMatrix::from_row_major(n, d, rng.normal_vec(n * d))?;
    Ok(AffineSurrogate::new(Point::from_vec(rng.normal_vec(n)), v, Point::zeros(d))?)
}

fn row_l1(v: &DenseMatrix, i: usize) -> f64 {
    v.row(i).iter().map(|x| x.abs()).sum()
}

#[derive(Default)]
struct Tally {
    worst_ratio: f64,
    failures: usize,
}

impl Tally {
    /// Records one instance: exact value `res`, grid minimum, resolution `h·Lip_∞`.
    fn add(&mut self, res: &GlmoResult, outer: &OuterFunction, s: &AffineSurrogate, domain: &DomainSpec, best: f64, resolution: f64) {
        let x = res.x_star.as_slice();
        let recomputed = outer.eval(s.eval(x).as_slice(), x);
        let diff = (res.surrogate_value - best).abs();
        self.worst_ratio = self.worst_ratio.max(diff / resolution);
        let ok = diff <= 3.0 * resolution
            && res.surrogate_value <= best + 1e-9
            && domain.contains(x, 1e-9)
            && (recomputed - res.surrogate_value).abs() <= 1e-9 * (1.0 + recomputed.abs());
        if !ok {
            self.failures += 1;
        }
    }
}

fn grid_min(points: &[Vec<f64>], outer: &OuterFunction, s: &AffineSurrogate) -> f64 {
    points.iter().map(|x| outer.eval(s.eval(x).as_slice(), x)).fold(f64::INFINITY, f64::min)
}

fn spacing(d: usize) -> f64 {
    if d == 3 {
        0.02
    } else {
        0.01
    }
}

fn max_affine(rng: &mut RngState) -> Result<Tally> {
    let mut t = Tally::default();
    let grids: Vec<Vec<Vec<f64>>> = (1..=3).map(|d| grid(&DomainSpec::l1_ball(d, 1.0).unwrap(), spacing(d))).collect();
    for _ in 0..INSTANCES {
        let (n, d) = (1 + rng.index(4), 1 + rng.index(3));
        let dom = DomainSpec::l1_ball(d, 1.0)?;
        let s = random_surrogate(n, d, rng)?;
        let outer = OuterFunction::max_of_components(n)?;
        let res = glmo_max_affine(&s, &dom)?;
        let lip = (0..n).map(|i| row_l1(&s.v, i)).fold(0.0, f64::max);
        t.add(&res, &outer, &s, &dom, grid_min(&grids[d - 1], &outer, &s), spacing(d) * lip.max(1e-12));
    }
    Ok(t)
}

fn cvar(rng: &mut RngState) -> Result<Tally> {
    let mut t = Tally::default();
    let grids: Vec<Vec<Vec<f64>>> =
        (1..=2).map(|k| grid(&DomainSpec::simplex_cross_interval(k, -1.0, 1.0).unwrap(), spacing(k + 1))).collect();
    for _ in 0..INSTANCES {
        let (n, k) = (1 + rng.index(4), 1 + rng.index(2));
        let d = k + 1;
        let alpha = [0.5, 0.75, 0.9][rng.index(3)];
        let dom = DomainSpec::simplex_cross_interval(k, -1.0, 1.0)?;
        let s = random_surrogate(n, d, rng)?;
        let outer = OuterFunction::cvar_threshold(alpha, n)?;
        let res = glmo_cvar(&s, &dom, alpha)?;
        let hinge: f64 = (0..n).map(|i| row_l1(&s.v, i)).sum::<f64>() / ((1.0 - alpha) * n as f64);
        t.add(&res, &outer, &s, &dom, grid_min(&grids[k - 1], &outer, &s), spacing(d) * (1.0 + hinge));
    }
    Ok(t)
}

fn composite(rng: &mut RngState) -> Result<Tally> {
    let mut t = Tally::default();
    let grids: Vec<Vec<Vec<f64>>> = (1..=3).map(|d| grid(&DomainSpec::box_domain(d, -1.0, 1.0).unwrap(), spacing(d))).collect();
    for _ in 0..INSTANCES {
        let d = 1 + rng.index(3);
        let lambda = 1.5 * rng.uniform();
        let reg = Regularizer::L1Penalty { lambda };
        let dom = DomainSpec::box_domain(d, -1.0, 1.0)?;
        let s = random_surrogate(1, d, rng)?;
        let outer = OuterFunction::additive_composite(reg)?;
        let res = glmo_composite(&s, &dom, reg)?;
        let lip = row_l1(&s.v, 0) + lambda * d as f64;
        t.add(&res, &outer, &s, &dom, grid_min(&grids[d - 1], &outer, &s), spacing(d) * lip.max(1e-12));
    }
    Ok(t)
}

/// Minimum over all basic feasible points of a box-bounded LP with `≤` rows.
fn enumerate_vertices(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars();
    let mut planes: Vec<(Vec<f64>, f64)> =
        (0..lp.n_constraints()).map(|i| (lp.constraints.row(i).to_vec(), lp.rhs[i])).collect();
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let m = planes.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| planes[idx[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[idx[r]].1);
        if let Some(x) = a.lu().solve(&b) {
            let xs: Vec<f64> = x.iter().copied().collect();
            if xs.iter().all(|v| v.is_finite()) && lp.max_violation(&xs) <= 1e-9 {
                let val: f64 = lp.objective.iter().zip(&xs).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(val, |b: f64| b.min(val)));
            }
        }
        // advance to the next n-subset of planes
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_lp(rng: &mut RngState) -> Result<LinearProgram> {
    let n = 2 + rng.index(4);
    let m = 1 + rng.index(6);
    let a = DenseMatrix::from_row_major(m, n, rng.normal_vec(m * n))?;
    // the origin is strictly feasible, so every instance has an optimum
    let rhs: Vec<f64> = (0..m).map(|_| 0.2 + rng.uniform()).collect();
    let bounds = (0..n).map(|_| (-1.0 - rng.uniform(), 1.0 + rng.uniform())).collect();
    Ok(LinearProgram { objective: rng.normal_vec(n), constraints: a, rhs, senses: vec![Sense::Le; m], bounds })
}

fn lps(rng: &mut RngState) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..LPS {
        let lp = random_lp(rng)?;
        let sol = solve_lp(&lp, DEFAULT_FEAS_TOL)?;
        let Some(reference) = enumerate_vertices(&lp) else { bail!("enumeration found no vertex") };
        let diff = (sol.objective_value - reference).abs();
        worst = worst.max(diff);
        if sol.status != LpStatus::Optimal || diff > 1e-8 {
            failures += 1;
        }
    }
    Ok((worst, failures))
}

pub(super) fn equivalence() -> Result<Outcome> {
    let mut rng = RngState::new(404);
    let tallies = [("max_affine", max_affine(&mut rng)?), ("cvar", cvar(&mut rng)?), ("composite", composite(&mut rng)?)];
    let (lp_worst, lp_failures) = lps(&mut rng)?;
    let mut parts: Vec<String> = tallies
        .iter()
        .map(|(name, t)| format!("{name}: {} fails/{INSTANCES}, worst |diff|/resolution={:.3}", t.failures, t.worst_ratio))
        .collect();
    parts.push(format!("LP: {lp_failures} fails/{LPS}, worst |diff|={lp_worst:.2e}"));
    Ok(Outcome {
        passed: tallies.iter().all(|(_, t)| t.failures == 0) && lp_failures == 0,
        measured: parts.join("; "),
    })
}
