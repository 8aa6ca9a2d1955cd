use std::sync::Arc;

use compfw_core::problems::{
    cvar_value, estimate_sigmas, load_libsvm, make_custom_quadratic, make_cvar_portfolio, make_matrix_completion,
    make_minimax_regression, to_libsvm_string, CompletionParams, MatrixCompletion, MinimaxParams, PortfolioParams,
    QuadraticParams,
};
use compfw_core::{DenseMatrix, DomainSpec, NoiseSpec, OuterFunction, Point, ProblemInstance, Regularizer, RngState};
use proptest::prelude::*;

fn small_tasks() -> Vec<ProblemInstance> {
    let mut rng = RngState::new(3);
    let minimax = MinimaxParams { groups: 3, dim: 2, samples_per_group: 50, ..MinimaxParams::small() };
    let portfolio = PortfolioParams { assets: 3, horizon: 10, ..PortfolioParams::standard() };
    let completion = CompletionParams { rows: 4, cols: 3, rank: 1, density: 0.5, ..CompletionParams::standard() };
    let quad = QuadraticParams {
        cubic_scale: 0.5,
        value_noise: NoiseSpec::gaussian(0.3),
        jacobian_noise: NoiseSpec::symmetric_pareto(0.3, 2.0),
        hessian_noise: 0.5,
        ..QuadraticParams::convex(2, 3)
    };
    vec![
        make_minimax_regression(&minimax, &mut rng).unwrap(),
        make_cvar_portfolio(&portfolio, &mut rng).unwrap(),
        make_matrix_completion(&completion, &mut rng).unwrap(),
        make_custom_quadratic(
            &quad,
            DomainSpec::box_domain(3, -1.0, 1.0).unwrap(),
            OuterFunction::max_of_components(2).unwrap(),
            &mut rng,
        )
        .unwrap(),
    ]
}

/// Pooled squared z-scores of `queries` sample means against the exact pair.
///
/// Returns `(mean z², number of random coordinates)`; coordinates without
/// noise must match exactly.
fn unbiasedness_statistic(p: &ProblemInstance, queries: usize, rng: &mut RngState) -> (f64, usize) {
    let mut z2 = 0.0;
    let mut count = 0;
    for _ in 0..5 {
        let x = p.domain.sample_mixed(rng);
        let exact = p.exact(&x).unwrap();
        let truth: Vec<f64> = exact.value.iter().chain(exact.jacobian.as_slice()).copied().collect();
        let mut sum = vec![0.0; truth.len()];
        let mut sq = vec![0.0; truth.len()];
        for _ in 0..queries {
            let s = p.inner.query(&x, rng);
            for (i, v) in s.value.iter().chain(s.jacobian.as_slice()).enumerate() {
                let dev = v - truth[i];
                sum[i] += dev;
                sq[i] += dev * dev;
            }
        }
        let q = queries as f64;
        for i in 0..truth.len() {
            let mean = sum[i] / q;
            let var = (sq[i] / q - mean * mean) * q / (q - 1.0);
            if var <= 1e-24 * (1.0 + truth[i].abs()) {
                assert!(mean.abs() <= 1e-10 * (1.0 + truth[i].abs()), "{}: biased noiseless coordinate", p.name);
                continue;
            }
            z2 += mean * mean / (var / q);
            count += 1;
        }
    }
    (z2 / count.max(1) as f64, count)
}

#[test]
fn stochastic_oracles_are_unbiased() {
    let mut rng = RngState::new(30);
    for p in small_tasks() {
        let (stat, count) = unbiasedness_statistic(&p, 10_000, &mut rng);
        // mean of `count` squared z-scores: expectation 1, standard error √(2/count)
        let limit = 1.0 + 3.0 * (2.0 / count as f64).sqrt();
        assert!(stat <= limit, "{}: pooled z² {stat} > {limit} over {count} coordinates", p.name);
    }
}

#[test]
fn jacobians_match_central_differences() {
    let mut rng = RngState::new(31);
    for p in small_tasks() {
        for _ in 0..5 {
            let x = p.domain.sample_mixed(&mut rng);
            let jac = p.exact(&x).unwrap().jacobian;
            let h = 1e-6;
            let mut fd = DenseMatrix::zeros(jac.rows(), jac.cols());
            for j in 0..x.dim() {
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let (fp, fm) = (p.exact(&xp).unwrap().value, p.exact(&xm).unwrap().value);
                for i in 0..jac.rows() {
                    fd[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            let err = fd.sub(&jac).frobenius_norm();
            assert!(err <= 1e-5 * jac.frobenius_norm().max(1.0), "{}: {err}", p.name);
        }
    }
}

#[test]
fn minimax_groups_at_seed_3_are_unbiased() {
    let params = MinimaxParams { groups: 3, dim: 2, samples_per_group: 50, ..MinimaxParams::small() };
    let p = make_minimax_regression(&params, &mut RngState::new(3)).unwrap();
    let mut rng = RngState::new(3);
    for _ in 0..5 {
        let x = p.domain.sample_mixed(&mut rng);
        let exact = p.exact(&x).unwrap().value;
        let q = 10_000;
        let draws: Vec<Point> = (0..q).map(|_| p.inner.query(&x, &mut rng).value).collect();
        for i in 0..3 {
            let mean = draws.iter().map(|d| d[i]).sum::<f64>() / q as f64;
            let var = draws.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (q - 1) as f64;
            let se = (var / q as f64).sqrt();
            assert!((mean - exact[i]).abs() <= 3.0 * se, "group {i}: {mean} vs {} (se {se})", exact[i]);
        }
    }
}

#[test]
fn completion_jacobian_is_constant() {
    let params = CompletionParams { rows: 5, cols: 4, rank: 2, density: 0.6, ..CompletionParams::standard() };
    let p = make_matrix_completion(&params, &mut RngState::new(4)).unwrap();
    let mut rng = RngState::new(5);
    let j0 = p.inner.query(&p.domain.default_start(), &mut rng).jacobian;
    for _ in 0..20 {
        let x = p.domain.sample_mixed(&mut rng);
        assert_eq!(p.inner.query(&x, &mut rng).jacobian, j0);
    }
    assert_eq!(p.constants().sigma_g, 0.0);
    let (_, sg) = estimate_sigmas(p.inner.as_ref(), &p.domain, 2.0, 5, 50, &mut rng);
    assert_eq!(sg, 0.0);
}

#[test]
fn rank_one_completion_objective_at_zero() {
    let a = [1.5, -0.5, 2.0];
    let b = [0.3, -1.2, 0.8];
    let truth = DenseMatrix::outer(&a, &b);
    let observed: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
    let oracle = MatrixCompletion::new(truth.clone(), observed, NoiseSpec::none()).unwrap();
    let p = ProblemInstance::new(
        Arc::new(oracle),
        OuterFunction::l1_norm_mean(9).unwrap(),
        DomainSpec::nuclear_ball(3, 3, 10.0).unwrap(),
        "rank one",
    )
    .unwrap();
    let mut direct = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            direct += (a[i] * b[j]).abs();
        }
    }
    assert!((p.objective(&Point::zeros(9)).unwrap() - direct / 9.0).abs() < 1e-14);
    assert_eq!(p.objective(&Point::from_vec(truth.into_vec())).unwrap(), 0.0);
}

#[test]
fn single_asset_portfolio_is_one_dimensional_cvar() {
    let params = PortfolioParams { assets: 1, horizon: 40, noise: NoiseSpec::none(), ..PortfolioParams::standard() };
    let p = make_cvar_portfolio(&params, &mut RngState::new(6)).unwrap();
    // losses at threshold 0
    let losses: Vec<f64> = p.exact(&Point::from_vec(vec![1.0, 0.0])).unwrap().value.into_vec();
    let mut grid_min = f64::INFINITY;
    for s in 0..=20_000 {
        let y0 = -1.0 + s as f64 * 1e-4;
        grid_min = grid_min.min(p.objective(&Point::from_vec(vec![1.0, y0])).unwrap());
    }
    let closed = cvar_value(&losses, params.alpha);
    // slopes are at most 1/(1−α) = 20, so a 1e-4 grid is within 1e-3
    assert!((grid_min - closed).abs() <= 1e-3, "{grid_min} vs {closed}");
}

#[test]
fn libsvm_round_trip_is_bit_exact() {
    let mut rng = RngState::new(7);
    let mut data = vec![0.0; 60];
    for (i, v) in data.iter_mut().enumerate() {
        // keep the last column populated so the reloaded width matches
        if i % 6 == 5 || rng.uniform() < 0.4 {
            *v = rng.normal();
        }
    }
    let features = DenseMatrix::from_row_major(10, 6, data).unwrap();
    let labels = Point::from_vec((0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.svm");
    std::fs::write(&path, to_libsvm_string(&features, &labels)).unwrap();
    let (f2, l2) = load_libsvm(&path).unwrap();
    assert_eq!(f2, features);
    assert_eq!(l2, labels);
}

fn outer_kinds(n: usize) -> Vec<OuterFunction> {
    vec![
        OuterFunction::max_of_components(n).unwrap(),
        OuterFunction::cvar(0.7, n).unwrap(),
        OuterFunction::cvar_threshold(0.9, n).unwrap(),
        OuterFunction::l1_norm_mean(n).unwrap(),
        OuterFunction::linear_first_component(n).unwrap(),
    ]
}

fn composite_kinds() -> Vec<OuterFunction> {
    vec![
        OuterFunction::additive_composite(Regularizer::Zero).unwrap(),
        OuterFunction::additive_composite(Regularizer::L1Penalty { lambda: 0.4 }).unwrap(),
    ]
}

proptest! {
    #[test]
    fn outer_functions_are_monotone(
        u in prop::collection::vec(0.0f64..5.0, 1..6),
        bump in prop::collection::vec(0.0f64..2.0, 6),
        x in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        // sampled on the nonnegative orthant, where the mean ℓ1 loss is monotone
        let v: Vec<f64> = u.iter().zip(&bump).map(|(a, b)| a + b).collect();
        for f in outer_kinds(u.len()) {
            prop_assert!(f.eval(&u, &x) <= f.eval(&v, &x) + 1e-12, "{:?}", f.kind);
        }
        for f in composite_kinds() {
            prop_assert!(f.eval(&u[..1], &x) <= f.eval(&v[..1], &x) + 1e-12);
        }
    }

    #[test]
    fn outer_functions_are_subhomogeneous(
        u in prop::collection::vec(-5.0f64..5.0, 1..6),
        x in prop::collection::vec(-1.0f64..1.0, 3),
        gamma in 1.0f64..10.0,
    ) {
        let gu: Vec<f64> = u.iter().map(|v| gamma * v).collect();
        let gx: Vec<f64> = x.iter().map(|v| gamma * v).collect();
        for f in outer_kinds(u.len()) {
            // the threshold kind carries its offset in x, so it scales jointly
            let xs = if matches!(f.kind, compfw_core::OuterKind::CvarThreshold { .. }) { &gx } else { &x };
            let lhs = f.eval(&gu, xs);
            let rhs = gamma * f.eval(&u, &x);
            prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()), "{:?}: {} > {}", f.kind, lhs, rhs);
        }
        for f in composite_kinds() {
            prop_assert!(f.eval(&gu[..1], &x) <= gamma * f.eval(&u[..1], &x) + 1e-9 * (1.0 + gamma * u[0].abs()));
        }
    }

    #[test]
    fn outer_functions_are_lipschitz(
        u in prop::collection::vec(-5.0f64..5.0, 1..6),
        w in prop::collection::vec(-5.0f64..5.0, 6),
        x in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let v = &w[..u.len()];
        let dist: f64 = u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        for f in outer_kinds(u.len()).into_iter().chain(composite_kinds()) {
            let k = f.arity;
            let d = if k == 1 { (u[0] - v[0]).abs() } else { dist };
            let gap = (f.eval(&u[..k], &x) - f.eval(&v[..k], &x)).abs();
            prop_assert!(gap <= f.lipschitz * d + 1e-12, "{:?}", f.kind);
        }
    }
}
