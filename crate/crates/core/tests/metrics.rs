use std::sync::Arc;

use compfw_core::metrics::{
    compute_theory_constants, curvature_probe, default_gamma_grid, fit_rate, generalized_fw_gap, TheoryConstants,
    TheoryInputs,
};
use compfw_core::problems::{
    make_custom_quadratic, make_cvar_portfolio, make_matrix_completion, make_minimax_regression, CompletionParams,
    MinimaxParams, PortfolioParams, QuadraticFamily, QuadraticParams,
};
use compfw_core::{
    DenseMatrix, DomainSpec, GlmoParams, InnerOracle, NoiseSpec, OracleConstants, OracleSample, OuterFunction, Point,
    ProblemInstance, RngState, Schedule, SolverConfig, Variant,
};

/// `f(x) = a ⊙ x²` componentwise on a one-dimensional domain, or `f(x) = x` when `square` is off.
#[derive(Debug)]
struct Scalar {
    square: bool,
}

impl InnerOracle for Scalar {
    fn dim_x(&self) -> usize {
        1
    }

    fn dim_u(&self) -> usize {
        1
    }

    fn query(&self, x: &Point, _rng: &mut RngState) -> OracleSample {
        self.exact(x).unwrap()
    }

    fn exact(&self, x: &Point) -> Option<OracleSample> {
        let (v, j) = if self.square { (x[0] * x[0], 2.0 * x[0]) } else { (x[0], 1.0) };
        Some(OracleSample { value: Point::from_vec(vec![v]), jacobian: DenseMatrix::from_rows(&[vec![j]]).unwrap() })
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants {
            smoothness: if self.square { 2.0 } else { 0.0 },
            jacobian_lipschitz: if self.square { 2.0 } else { 0.0 },
            g_bound: Some(2.0),
            sigma_f: 0.0,
            sigma_g: 0.0,
            sigma_h: Some(0.0),
            moment_order: 2.0,
        }
    }
}

fn scalar(square: bool) -> ProblemInstance {
    ProblemInstance::new(
        Arc::new(Scalar { square }),
        OuterFunction::linear_first_component(1).unwrap(),
        DomainSpec::box_domain(1, -1.0, 1.0).unwrap(),
        "scalar",
    )
    .unwrap()
}

fn task_small() -> ProblemInstance {
    make_minimax_regression(&MinimaxParams::small(), &mut RngState::new(0)).unwrap()
}

#[test]
fn identity_gap_on_the_interval() {
    let g = generalized_fw_gap(&scalar(false), &Point::from_vec(vec![0.5]), &GlmoParams::default()).unwrap();
    assert_eq!(g, 1.5);
}

#[test]
fn gap_vanishes_at_a_convex_minimizer() {
    let dom = DomainSpec::l1_ball(3, 1.0).unwrap();
    let center = [0.2, -0.3, 0.1];
    let q = vec![DenseMatrix::identity(3), DenseMatrix::diagonal(&[1.0, 4.0, 0.5])];
    let fam = QuadraticFamily::centered(q, &center, &dom, &mut RngState::new(1)).unwrap();
    let p = ProblemInstance::new(Arc::new(fam), OuterFunction::max_of_components(2).unwrap(), dom, "centered").unwrap();
    let g = generalized_fw_gap(&p, &Point::from_vec(center.to_vec()), &GlmoParams::default()).unwrap();
    assert!(g.abs() <= 1e-6, "{g}");
}

#[test]
fn gap_dominates_suboptimality_on_task_one() {
    let p = task_small();
    let y0 = p.domain.default_start();
    let cfg = SolverConfig::new(Variant::DeterministicBasic, Schedule::deterministic_convex(), 20_000, 0).with_record_every(100);
    let rec = compfw_core::solver::run(&p, &cfg, &y0).unwrap();
    let phi_star = rec.rows.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
    let mut rng = RngState::new(2);
    for _ in 0..50 {
        let y = p.domain.sample_mixed(&mut rng);
        let gap = generalized_fw_gap(&p, &y, &GlmoParams::default()).unwrap();
        assert!(gap >= p.objective(&y).unwrap() - phi_star - 1e-8);
    }
}

#[test]
fn linear_first_component_gap_is_the_classical_gap() {
    let mut rng = RngState::new(3);
    let domains = [
        DomainSpec::l1_ball(3, 2.0).unwrap(),
        DomainSpec::box_domain(3, -1.0, 0.5).unwrap(),
        DomainSpec::simplex_cross_interval(2, -1.0, 1.0).unwrap(),
    ];
    for dom in domains {
        let params = QuadraticParams { eig_lo: -1.0, cubic_scale: 0.5, ..QuadraticParams::convex(2, 3) };
        let p = make_custom_quadratic(&params, dom, OuterFunction::linear_first_component(2).unwrap(), &mut rng).unwrap();
        for _ in 0..20 {
            let y = dom.sample_mixed(&mut rng);
            let grad = p.exact(&y).unwrap().jacobian.row(0).to_vec();
            let x = dom.lmo(&grad).unwrap();
            let classical: f64 = grad.iter().zip(y.iter().zip(x.iter())).map(|(g, (a, b))| g * (a - b)).sum();
            let gap = generalized_fw_gap(&p, &y, &GlmoParams::default()).unwrap();
            assert!((gap - classical).abs() <= 1e-8, "{dom:?}: {gap} vs {classical}");
        }
    }
}

#[test]
fn curvature_probe_examples() {
    let grid = default_gamma_grid();
    let mut rng = RngState::new(4);
    assert!(curvature_probe(&scalar(false), 1000, &grid, &mut rng).unwrap() <= 1e-10);
    let sq = scalar(true);
    let est = curvature_probe(&sq, 1000, &grid, &mut rng).unwrap();
    assert!(est <= 8.0 && est <= sq.curvature_bound() + 1e-8, "{est}");
    // the endpoints ±1 realize the full curvature of x² along the interval
    assert!(est >= 4.0);
}

#[test]
fn curvature_probe_respects_the_bound_on_every_task() {
    let mut rng = RngState::new(5);
    let tasks = [
        task_small(),
        make_cvar_portfolio(&PortfolioParams::standard(), &mut rng).unwrap(),
        make_matrix_completion(&CompletionParams::standard(), &mut rng).unwrap(),
    ];
    for p in &tasks {
        let est = curvature_probe(p, 200, &default_gamma_grid(), &mut rng).unwrap();
        assert!(est <= p.curvature_bound() + 1e-8, "{}: {est} > {}", p.name, p.curvature_bound());
    }
}

#[test]
fn theory_constants_grow_with_noise_and_diameter() {
    let base = TheoryInputs {
        lf: 1.0,
        l: 2.0,
        l_jac: 3.0,
        g: Some(4.0),
        d: 1.0,
        n: 5,
        sigma_f: 0.5,
        sigma_g: 0.5,
        r: 2.0,
        phi0: 1.0,
        init_moment_g: 0.3,
        init_moment_f: 0.2,
    };
    let eval = |t: TheoryInputs| {
        let c = TheoryConstants::from_inputs(t).unwrap();
        (c.m_i().unwrap(), c.m_ii)
    };
    for r in [1.5, 2.0] {
        for step in 0..10 {
            let s = 0.3 * step as f64;
            let t = TheoryInputs { r, sigma_f: s, sigma_g: s, d: 0.5 + s, ..base };
            let (mi, mii) = eval(t);
            for bumped in [
                TheoryInputs { sigma_f: s + 0.3, ..t },
                TheoryInputs { sigma_g: s + 0.3, ..t },
                TheoryInputs { d: t.d + 0.3, ..t },
            ] {
                let (mi2, mii2) = eval(bumped);
                assert!(mi2 >= mi && mii2 >= mii, "r = {r}, step {step}");
            }
        }
    }
}

#[test]
fn task_constants_are_finite() {
    let p = task_small();
    let c = compute_theory_constants(&p, 1.0, 2.0, 1000, &mut RngState::new(6)).unwrap();
    assert_eq!(c.c_r, 1.0);
    assert!(c.m_ii.is_finite() && c.m_i().unwrap().is_finite() && c.a_cvx.is_finite());
    assert!((c.s_bound - p.curvature_bound()).abs() <= 1e-12 * c.s_bound);
}

#[test]
fn rate_fit_examples() {
    let ks = [256.0, 512.0, 1024.0, 2048.0, 4096.0];
    let quarter: Vec<(f64, f64)> = ks.iter().map(|k: &f64| (*k, k.powf(-0.25))).collect();
    let fit = fit_rate(&quarter).unwrap();
    assert!((fit.slope + 0.25).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
    let flat: Vec<(f64, f64)> = ks.iter().map(|k| (*k, 0.7)).collect();
    assert!(fit_rate(&flat).unwrap().slope.abs() < 1e-12);
    let third: Vec<(f64, f64)> = ks.iter().map(|k: &f64| (*k, 3.0 * k.powf(-1.0 / 3.0))).collect();
    let fit = fit_rate(&third).unwrap();
    assert!((fit.slope + 1.0 / 3.0).abs() < 1e-12 && (fit.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (4.0, -1.0)]).is_err());
}

#[test]
fn noise_free_constants_use_the_deterministic_maxima() {
    let params = QuadraticParams { value_noise: NoiseSpec::none(), ..QuadraticParams::convex(2, 2) };
    let p = make_custom_quadratic(&params, DomainSpec::l1_ball(2, 1.0).unwrap(), OuterFunction::max_of_components(2).unwrap(), &mut RngState::new(7))
        .unwrap();
    let c = compute_theory_constants(&p, 0.5, 2.0, 100, &mut RngState::new(8)).unwrap();
    assert_eq!((c.e_g0, c.e_f0), (0.0, 0.0));
    let k = p.constants();
    assert!((c.u_g - 3f64.sqrt() * k.jacobian_lipschitz * p.domain.diameter()).abs() <= 1e-12 * c.u_g);
}
