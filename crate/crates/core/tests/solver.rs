use compfw_core::problems::{
    make_custom_quadratic, make_cvar_portfolio, make_matrix_completion, make_minimax_regression, CompletionParams,
    MinimaxParams, PortfolioParams, QuadraticParams,
};
use compfw_core::solver::{run, run_clipped_scfw, run_vanilla_scfw, GAP_TOL};
use compfw_core::{DomainSpec, NoiseSpec, OuterFunction, ProblemInstance, RngState, Schedule, SolverConfig, Variant};

fn minimax(noise: NoiseSpec) -> ProblemInstance {
    let params = MinimaxParams { groups: 3, dim: 6, tau: 1.5, samples_per_group: 30, noise, ..MinimaxParams::small() };
    make_minimax_regression(&params, &mut RngState::new(21)).unwrap()
}

fn convex_quadratic() -> ProblemInstance {
    make_custom_quadratic(
        &QuadraticParams::convex(3, 4),
        DomainSpec::l1_ball(4, 1.0).unwrap(),
        OuterFunction::max_of_components(3).unwrap(),
        &mut RngState::new(22),
    )
    .unwrap()
}

#[test]
fn identical_seeds_give_identical_records() {
    let p = minimax(NoiseSpec::gaussian(0.5));
    let cfg = SolverConfig::new(Variant::Variant2, Schedule::nonconvex_constant(256, 2.0).unwrap(), 256, 9);
    let y0 = p.domain.default_start();
    assert_eq!(run(&p, &cfg, &y0).unwrap(), run(&p, &cfg, &y0).unwrap());
}

#[test]
fn unit_weight_variants_interpolate_the_basic_method() {
    let p = minimax(NoiseSpec::none());
    let y0 = p.domain.default_start();
    let basic = run(&p, &SolverConfig::new(Variant::DeterministicBasic, Schedule::deterministic_nonconvex(), 200, 1), &y0).unwrap();
    for v in [Variant::Variant1, Variant::Variant2, Variant::VanillaScfw] {
        let cfg = SolverConfig::new(v, Schedule::deterministic_nonconvex(), 200, 1);
        let rec = run(&p, &cfg, &y0).unwrap();
        assert_eq!(rec.rows, basic.rows, "{v:?}");
        assert_eq!(rec.final_point, basic.final_point);
    }
    let vanilla = run_vanilla_scfw(&p, &SolverConfig::new(Variant::VanillaScfw, Schedule::deterministic_nonconvex(), 200, 5), &y0).unwrap();
    assert_eq!(vanilla.final_point, basic.final_point);
}

#[test]
fn inactive_clip_matches_vanilla() {
    let p = minimax(NoiseSpec::gaussian(0.5));
    let y0 = p.domain.default_start();
    let sched = Schedule::nonconvex_constant(300, 2.0).unwrap();
    let vanilla = run(&p, &SolverConfig::new(Variant::VanillaScfw, sched.clone(), 300, 4), &y0).unwrap();
    let cfg = SolverConfig::new(Variant::ClippedScfw { clip: 1e300 }, sched, 300, 4);
    let clipped = run_clipped_scfw(&p, &cfg, &y0, 1e300).unwrap();
    assert_eq!(vanilla.rows, clipped.rows);
}

#[test]
fn iterates_stay_feasible_and_gaps_nonnegative() {
    let mut rng = RngState::new(23);
    let tasks = [
        minimax(NoiseSpec::gaussian(0.5)),
        make_cvar_portfolio(&PortfolioParams { assets: 5, horizon: 20, ..PortfolioParams::standard() }, &mut rng).unwrap(),
        make_matrix_completion(&CompletionParams { rows: 6, cols: 5, rank: 2, ..CompletionParams::standard() }, &mut rng)
            .unwrap(),
    ];
    for p in &tasks {
        for v in [Variant::Variant1, Variant::Variant2, Variant::Storm, Variant::VanillaScfw] {
            for k in [1, 17, 128] {
                let cfg = SolverConfig::new(v, Schedule::nonconvex_constant(k, 2.0).unwrap(), k, 3).with_record_every(1);
                let rec = run(p, &cfg, &p.domain.default_start()).unwrap();
                assert!(p.domain.contains(rec.final_point.as_slice(), 1e-8), "{} {v:?}", p.name);
                assert!(rec.rows.iter().all(|r| r.gap >= -GAP_TOL), "{} {v:?}", p.name);
                assert_eq!(rec.rows.len(), k + 1);
            }
        }
    }
}

#[test]
fn deterministic_steps_satisfy_the_descent_inequality() {
    let p = convex_quadratic();
    let s = p.curvature_bound();
    let cfg = SolverConfig::new(Variant::DeterministicBasic, Schedule::deterministic_nonconvex(), 300, 0).with_record_every(1);
    let rec = run(&p, &cfg, &p.domain.default_start()).unwrap();
    for w in rec.rows.windows(2) {
        let gamma = 1.0 / ((w[0].k + 1) as f64).sqrt();
        let rhs = w[0].objective - gamma * w[0].gap + gamma * gamma * s / 2.0;
        assert!(w[1].objective <= rhs + 1e-10, "k = {}", w[0].k);
    }
}

#[test]
fn convex_basic_method_meets_the_2s_over_k_bound() {
    let p = convex_quadratic();
    let s = p.curvature_bound();
    let y0 = p.domain.default_start();
    // a certified lower bound on φ*: convex gaps satisfy φ(y) − Δ̂(y) ≤ φ*
    let long = SolverConfig::new(Variant::DeterministicBasic, Schedule::deterministic_convex(), 20_000, 0).with_record_every(50);
    let rec = run(&p, &long, &y0).unwrap();
    let phi_lower = rec.rows.iter().map(|r| r.objective - r.gap).fold(f64::NEG_INFINITY, f64::max);
    for k in [10, 50, 100, 500] {
        let cfg = SolverConfig::new(Variant::DeterministicBasic, Schedule::deterministic_convex(), k, 0);
        let rec = run(&p, &cfg, &y0).unwrap();
        let phi_k = p.objective(&rec.final_point).unwrap();
        assert!(phi_k - phi_lower <= 2.0 * s / (k as f64 + 1.0) + 1e-10, "K = {k}");
    }
}
