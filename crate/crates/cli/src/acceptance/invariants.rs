//! Gap nonnegativity, the curvature bound, and the reduction to the classical gap.

use anyhow::Result;
use compfw_core::metrics::{curvature_probe, default_gamma_grid, generalized_fw_gap};
use compfw_core::problems::{
    make_custom_quadratic, make_cvar_portfolio, make_matrix_completion, CompletionParams, PortfolioParams, QuadraticParams,
};
use compfw_core::{DomainSpec, GlmoParams, NoiseSpec, OuterFunction, ProblemInstance, RngState, Schedule, SolverConfig, Variant};

use super::{available_jobs, gaps_nonnegative, lowest_gap, task_one_small, Outcome};
use crate::experiment::run_cells;

fn tasks() -> Result<Vec<ProblemInstance>> {
    let mut rng = RngState::new(70);
    Ok(vec![
        task_one_small()?,
        make_cvar_portfolio(&PortfolioParams { assets: 10, horizon: 30, ..PortfolioParams::standard() }, &mut rng)?,
        make_matrix_completion(&CompletionParams { rows: 12, cols: 10, rank: 2, ..CompletionParams::standard() }, &mut rng)?,
    ])
}

fn hessian_task() -> Result<ProblemInstance> {
    let noise = NoiseSpec::gaussian(0.3);
    let params = QuadraticParams {
        eig_lo: -1.0,
        cubic_scale: 0.5,
        hessian_noise: 0.5,
        value_noise: noise,
        jacobian_noise: noise,
        ..QuadraticParams::convex(3, 6)
    };
    Ok(make_custom_quadratic(&params, DomainSpec::l1_ball(6, 1.0)?, OuterFunction::max_of_components(3)?, &mut RngState::new(71))?)
}

fn grid(k: usize, every: usize, with_hessian: bool) -> Result<Vec<(String, SolverConfig)>> {
    let mut variants = vec![
        (Variant::Variant1, Schedule::nonconvex_constant(k, 2.0)?),
        (Variant::Variant2, Schedule::nonconvex_constant(k, 2.0)?),
        (Variant::Storm, Schedule::storm_constant(k, 2.0)?),
        (Variant::VanillaScfw, Schedule::nonconvex_constant(k, 2.0)?),
        (Variant::ClippedScfw { clip: 1.0 }, Schedule::nonconvex_constant(k, 2.0)?),
        (Variant::DeterministicBasic, Schedule::deterministic_nonconvex()),
    ];
    if with_hessian {
        variants.push((Variant::Hessian, Schedule::nonconvex_constant(k, 2.0)?));
    }
    Ok(variants
        .into_iter()
        .flat_map(|(v, s)| (1..=2).map(move |seed| (v.name().to_string(), SolverConfig::new(v, s.clone(), k, seed).with_record_every(every))))
        .collect())
}

/// Lowest recorded raw gap over every variant on every task.
fn gap_floor() -> Result<(f64, usize)> {
    let mut lowest = f64::INFINITY;
    let mut rows = 0;
    let mut all = tasks()?;
    all.push(hessian_task()?);
    let last = all.len() - 1;
    for (i, p) in all.iter().enumerate() {
        // nuclear-ball gaps cost a thousand power iterations each, so that task records less often
        let (k, every) = if p.domain.is_polyhedral() { (128, 1) } else { (64, 4) };
        let cells = run_cells(p, &grid(k, every, i == last)?, available_jobs())?;
        for c in cells {
            let rec = c.record.map_err(|e| anyhow::anyhow!("{} on {}: {e}", c.algorithm, p.name))?;
            rows += rec.rows.len();
            lowest = lowest.min(lowest_gap([&rec]));
        }
    }
    Ok((lowest, rows))
}

fn curvature() -> Result<(bool, String)> {
    let mut rng = RngState::new(72);
    let mut ok = true;
    let mut parts = Vec::new();
    for p in tasks()? {
        let est = curvature_probe(&p, 1000, &default_gamma_grid(), &mut rng)?;
        let bound = p.curvature_bound();
        ok &= est <= bound + 1e-8;
        parts.push(format!("{} {est:.4} <= {bound:.4}", p.name));
    }
    Ok((ok, parts.join(", ")))
}

/// Largest `|Δ̂ − max_x ⟨∇f₁(y), y − x⟩|` with the classical side computed by the LMO.
fn classical_reduction() -> Result<f64> {
    let mut rng = RngState::new(73);
    let mut worst: f64 = 0.0;
    for dom in [
        DomainSpec::l1_ball(4, 1.5)?,
        DomainSpec::box_domain(4, -1.0, 2.0)?,
        DomainSpec::simplex_cross_interval(3, -1.0, 1.0)?,
    ] {
        let params = QuadraticParams { eig_lo: -1.0, cubic_scale: 0.5, ..QuadraticParams::convex(2, 4) };
        let p = make_custom_quadratic(&params, dom, OuterFunction::linear_first_component(2)?, &mut rng)?;
        for _ in 0..100 {
            let y = dom.sample_mixed(&mut rng);
            let grad = p.exact(&y)?.jacobian.row(0).to_vec();
            let x = dom.lmo(&grad)?;
            let classical: f64 = grad.iter().zip(y.iter().zip(x.iter())).map(|(g, (a, b))| g * (a - b)).sum();
            worst = worst.max((generalized_fw_gap(&p, &y, &GlmoParams::default())? - classical).abs());
        }
    }
    Ok(worst)
}

pub(super) fn gap_and_curvature() -> Result<Outcome> {
    let (lowest, rows) = gap_floor()?;
    let (curv_ok, curv) = curvature()?;
    let reduction = classical_reduction()?;
    Ok(Outcome {
        passed: gaps_nonnegative(lowest) && curv_ok && reduction <= 1e-8,
        measured: format!(
            "lowest gap {lowest:.2e} over {rows} rows >= -1e-8; curvature {curv}; classical gap diff {reduction:.2e} <= 1e-8"
        ),
    })
}
