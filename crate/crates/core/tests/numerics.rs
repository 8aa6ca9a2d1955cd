use compfw_core::numerics::{nuclear_norm, sample_noise_vector, singular_values, top_singular_pair};
use compfw_core::{DenseMatrix, NoiseSpec, RngState};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn random_matrix(rows: usize, cols: usize, rng: &mut RngState) -> DenseMatrix {
    DenseMatrix::from_row_major(rows, cols, rng.normal_vec(rows * cols)).unwrap()
}

#[test]
fn noise_vector_examples() {
    let mut rng = RngState::new(1);
    assert_eq!(sample_noise_vector(&NoiseSpec::none(), 3, &mut rng).unwrap().as_slice(), &[0.0; 3]);
    assert_eq!(sample_noise_vector(&NoiseSpec::gaussian(0.0), 5, &mut rng).unwrap().as_slice(), &[0.0; 5]);
    assert!(sample_noise_vector(&NoiseSpec::gaussian(1.0), 0, &mut rng).is_err());
    let bad = NoiseSpec::symmetric_pareto(1.0, 2.0).with_tail_index(1.5);
    assert!(sample_noise_vector(&bad, 2, &mut rng).is_err());
}

#[test]
fn unit_gaussian_moments() {
    let mut rng = RngState::new(2);
    let spec = NoiseSpec::gaussian(1.0);
    let draws: Vec<f64> = (0..100_000).map(|_| sample_noise_vector(&spec, 1, &mut rng).unwrap()[0]).collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    assert!(mean.abs() <= 0.02, "mean {mean}");
    assert!((0.97..=1.03).contains(&var), "variance {var}");
}

#[test]
fn heavy_tailed_r_moment_is_finite() {
    // tail 2.5 > r = 2: the running second moment settles instead of drifting upward
    let mut rng = RngState::new(3);
    let spec = NoiseSpec::symmetric_pareto(1.0, 2.0);
    let mut acc = 0.0;
    let mut snapshots = Vec::new();
    for i in 1..=200_000 {
        acc += sample_noise_vector(&spec, 2, &mut rng).unwrap().norm().powi(2);
        if i % 50_000 == 0 {
            snapshots.push(acc / i as f64);
        }
    }
    assert!(snapshots.iter().all(|v| v.is_finite()));
    let exact = 2.0 * spec.entry_variance().unwrap();
    assert!((snapshots[3] - exact).abs() < 0.5 * exact, "{snapshots:?} vs {exact}");
}

#[test]
fn top_pair_matches_full_svd_seed_7() {
    let mut rng = RngState::new(7);
    let m = random_matrix(5, 4, &mut rng);
    let p = top_singular_pair(&m, 1e-12, 100_000).unwrap();
    let reference = to_na(&m).svd(false, false).singular_values[0];
    assert!((p.value - reference).abs() < 1e-8, "{} vs {reference}", p.value);
}

#[test]
fn top_pair_gives_best_rank_one_residual() {
    let mut rng = RngState::new(8);
    for (r, c) in [(2, 2), (3, 5), (6, 4), (8, 8), (1, 7)] {
        let m = random_matrix(r, c, &mut rng);
        let p = top_singular_pair(&m, 1e-12, 200_000).unwrap();
        assert!(p.value <= m.frobenius_norm() + 1e-12);
        assert!((p.u.norm() - 1.0).abs() < 1e-10 && (p.v.norm() - 1.0).abs() < 1e-10);
        let mv = m.matvec(p.v.as_slice());
        let resid: f64 = mv.iter().zip(p.u.iter()).map(|(a, b)| (a - p.value * b).powi(2)).sum::<f64>().sqrt();
        assert!(resid <= 1e-10 * p.value.max(1.0), "residual {resid}");

        let sv = to_na(&m).svd(false, false).singular_values;
        let best: f64 = sv.iter().skip(1).map(|s| s * s).sum::<f64>().sqrt();
        let approx = m.sub(&DenseMatrix::outer(p.u.as_slice(), p.v.as_slice()).scaled(p.value));
        assert!((approx.frobenius_norm() - best).abs() < 1e-8);
    }
}

#[test]
fn jacobi_singular_values_match_reference() {
    let mut rng = RngState::new(9);
    for (r, c) in [(3, 3), (5, 2), (2, 6), (7, 7)] {
        let m = random_matrix(r, c, &mut rng);
        let mut reference: Vec<f64> = to_na(&m).svd(false, false).singular_values.iter().copied().collect();
        reference.sort_by(|a, b| b.total_cmp(a));
        let ours = singular_values(&m);
        assert_eq!(ours.len(), reference.len());
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12 * reference[0].max(1.0));
        }
        assert!((nuclear_norm(&m) - reference.iter().sum::<f64>()).abs() < 1e-11);
    }
}

proptest! {
    #[test]
    fn identical_seeds_give_identical_streams(seed in any::<u64>(), n in 1usize..64) {
        let mut a = RngState::new(seed);
        let mut b = RngState::new(seed);
        prop_assert_eq!(a.normal_vec(n), b.normal_vec(n));
        prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        prop_assert_eq!(a.substream(5).normal_vec(3), b.substream(5).normal_vec(3));
    }
}
