use compfw_core::lp::{solve_lp, LinearProgram, LpStatus, Sense, DEFAULT_FEAS_TOL};
use compfw_core::{DenseMatrix, RngState};
use nalgebra::{DMatrix, DVector};

/// Minimum over all basic feasible points of a box-bounded LP with `≤` rows.
fn enumerate_vertices(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars();
    // every candidate active constraint as (normal, rhs)
    let mut planes: Vec<(Vec<f64>, f64)> = (0..lp.n_constraints())
        .map(|i| (lp.constraints.row(i).to_vec(), lp.rhs[i]))
        .collect();
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
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
        // next n-combination of plane indices
        let m = planes.len();
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

fn random_box_lp(n: usize, m: usize, rng: &mut RngState) -> LinearProgram {
    let a = DenseMatrix::from_row_major(m, n, rng.normal_vec(m * n)).unwrap();
    // the origin is strictly feasible
    let rhs: Vec<f64> = (0..m).map(|_| 0.2 + rng.uniform()).collect();
    let bounds = (0..n).map(|_| (-1.0 - rng.uniform(), 1.0 + rng.uniform())).collect();
    LinearProgram { objective: rng.normal_vec(n), constraints: a, rhs, senses: vec![Sense::Le; m], bounds }
}

#[test]
fn seed_11_matches_vertex_enumeration() {
    let mut rng = RngState::new(11);
    let lp = random_box_lp(4, 5, &mut rng);
    let sol = solve_lp(&lp, DEFAULT_FEAS_TOL).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    let reference = enumerate_vertices(&lp).unwrap();
    assert!((sol.objective_value - reference).abs() < 1e-8, "{} vs {reference}", sol.objective_value);
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = RngState::new(12);
    for _ in 0..60 {
        let n = 2 + rng.index(4);
        let m = 1 + rng.index(6);
        let lp = random_box_lp(n, m, &mut rng);
        let sol = solve_lp(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let x = sol.x.as_ref().unwrap();
        assert!(lp.max_violation(x.as_slice()) <= DEFAULT_FEAS_TOL);
        let reference = enumerate_vertices(&lp).unwrap();
        assert!((sol.objective_value - reference).abs() < 1e-8);
    }
}

#[test]
fn dual_certificate_closes_the_gap() {
    let mut rng = RngState::new(13);
    for _ in 0..50 {
        let n = 2 + rng.index(4);
        let m = 1 + rng.index(5);
        let mut data = rng.normal_vec(m * n);
        // a budget row keeps the LP bounded
        data.extend(vec![1.0; n]);
        let a = DenseMatrix::from_row_major(m + 1, n, data).unwrap();
        let mut b: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
        b.push(5.0);
        let c = rng.normal_vec(n);
        let lp = LinearProgram::standard(c.clone(), a.clone(), b.clone());
        let sol = solve_lp(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let y = sol.duals.unwrap();
        // dual of min cᵀx, Ax ≤ b, x ≥ 0: max bᵀy with y ≤ 0 and Aᵀy ≤ c
        assert!(y.iter().all(|v| *v <= 1e-9));
        let aty = a.tr_matvec(&y);
        assert!(aty.iter().zip(&c).all(|(l, r)| *l <= r + 1e-9));
        let dual_value: f64 = b.iter().zip(&y).map(|(u, v)| u * v).sum();
        assert!((dual_value - sol.objective_value).abs() < 1e-8);
    }
}

#[test]
fn scaling_the_objective_keeps_the_vertex() {
    let mut rng = RngState::new(14);
    for _ in 0..50 {
        let lp = random_box_lp(3, 4, &mut rng);
        let mut doubled = lp.clone();
        doubled.objective.iter_mut().for_each(|c| *c *= 2.0);
        let a = solve_lp(&lp, DEFAULT_FEAS_TOL).unwrap();
        let b = solve_lp(&doubled, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.x, b.x);
    }
}

#[test]
fn solves_are_deterministic() {
    let mut rng = RngState::new(15);
    let lp = random_box_lp(5, 6, &mut rng);
    let a = solve_lp(&lp, DEFAULT_FEAS_TOL).unwrap();
    let b = solve_lp(&lp, DEFAULT_FEAS_TOL).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.pivots, b.pivots);
}
