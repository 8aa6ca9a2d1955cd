//! The hybrid momentum stochastic Frank–Wolfe loop and its baselines.
//!
//! Every variant shares one loop: advance the trackers at `y_k`, call the
//! GLMO on `(z_k, V_k, y_k)`, step `y_{k+1} = (1−γ_k)y_k + γ_k x_{k+1}`.
//! Baselines differ only in tracker kinds, forced weights and clipping, so
//! the deterministic mode and the momentum variants at `β = ρ = 1` share
//! arithmetic bit for bit.

use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::glmo::{solve_glmo, AffineSurrogate, GlmoParams};
use crate::metrics::gap_report;
use crate::numerics::{DenseMatrix, Point, RngState};
use crate::problems::{InnerOracle, OracleConstants, OracleSample, ProblemInstance};
use crate::trackers::{FnKind, JacKind, Schedule, TrackerState};

/// Feasibility slack accepted for the starting point.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// Recorded gaps may dip this far below zero from GLMO inexactness.
pub const GAP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    /// Polyak Jacobian and Polyak function trackers.
    Variant1,
    /// Polyak Jacobian and Taylor-corrected function trackers.
    Variant2,
    /// STORM Jacobian and Taylor-corrected function trackers.
    Storm,
    /// Hessian-corrected Jacobian and Taylor-corrected function trackers.
    Hessian,
    /// Raw single-sample surrogate (`β = ρ = 1`).
    VanillaScfw,
    /// Vanilla with each sampled Jacobian clipped to Frobenius norm `clip`.
    ClippedScfw { clip: f64 },
    /// Exact oracle, `β = ρ = 1`.
    DeterministicBasic,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Variant1 => "variant1",
            Variant::Variant2 => "variant2",
            Variant::Storm => "storm",
            Variant::Hessian => "hessian",
            Variant::VanillaScfw => "vanilla_scfw",
            Variant::ClippedScfw { .. } => "clipped_scfw",
            Variant::DeterministicBasic => "deterministic_basic",
        }
    }

    fn trackers(&self) -> (JacKind, FnKind) {
        match self {
            Variant::Variant1 | Variant::VanillaScfw | Variant::ClippedScfw { .. } | Variant::DeterministicBasic => {
                (JacKind::Polyak, FnKind::Polyak)
            }
            Variant::Variant2 => (JacKind::Polyak, FnKind::Taylor),
            Variant::Storm => (JacKind::Storm, FnKind::Taylor),
            Variant::Hessian => (JacKind::HessianCorrected, FnKind::Taylor),
        }
    }

    fn forces_unit_weights(&self) -> bool {
        matches!(self, Variant::VanillaScfw | Variant::ClippedScfw { .. } | Variant::DeterministicBasic)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub schedule: Schedule,
    /// Number of iterations `K`.
    pub horizon: usize,
    pub seed: u64,
    pub glmo: GlmoParams,
    /// Record every this many steps; `None` means `max(1, K/512)`.
    pub record_every: Option<usize>,
    /// Measure wall time per recorded step; off keeps traces reproducible.
    pub timing: bool,
}

impl SolverConfig {
    pub fn new(variant: Variant, schedule: Schedule, horizon: usize, seed: u64) -> Self {
        SolverConfig {
            variant,
            schedule,
            horizon,
            seed,
            glmo: GlmoParams::default(),
            record_every: None,
            timing: false,
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = Some(every);
        self
    }

    pub fn record_interval(&self) -> usize {
        self.record_every.unwrap_or((self.horizon / 512).max(1)).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if let Variant::ClippedScfw { clip } = self.variant {
            if !(clip > 0.0) {
                return Err(Error::config(format!("clip threshold must be > 0, got {clip}")));
            }
        }
        if self.record_every == Some(0) {
            return Err(Error::config("record_every must be >= 1"));
        }
        self.glmo.validate()?;
        self.schedule.clone().validated().map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// `φ(y_k)` from the exact oracle.
    pub objective: f64,
    /// Raw generalized gap `Δ̂(y_k)`; may dip slightly below zero.
    pub gap: f64,
    /// Running minimum of the clamped gap over recorded `k ≥ 1` (`k = 0` reports its own gap).
    pub gap_running_min: f64,
    /// `‖V_k − ∇f(y_k)‖_F`; absent at `k = K`, where no tracker update happens.
    pub delta_g_norm: Option<f64>,
    pub delta_f_norm: Option<f64>,
    pub glmo_inner_iters: usize,
    pub elapsed_ns: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<TraceRow>,
    /// Smallest recorded clamped gap over `k ≥ 1`, or at `y₀` when `K = 0`.
    pub min_gap: f64,
    pub argmin_k: usize,
    pub total_oracle_calls: u64,
    /// False when the problem has no exact oracle and gaps were not evaluated.
    pub gap_recorded: bool,
    pub final_point: Point,
}

/// Oracle adapter that answers every query exactly.
#[derive(Debug)]
struct ExactOracle(Arc<dyn InnerOracle>);

impl InnerOracle for ExactOracle {
    fn dim_x(&self) -> usize {
        self.0.dim_x()
    }

    fn dim_u(&self) -> usize {
        self.0.dim_u()
    }

    fn query(&self, x: &Point, _rng: &mut RngState) -> OracleSample {
        self.0.exact(x).expect("checked before wrapping")
    }

    fn exact(&self, x: &Point) -> Option<OracleSample> {
        self.0.exact(x)
    }

    fn hessian_query(&self, x: &Point, _rng: &mut RngState) -> Option<Vec<DenseMatrix>> {
        self.0.exact_hessian(x)
    }

    fn exact_hessian(&self, x: &Point) -> Option<Vec<DenseMatrix>> {
        self.0.exact_hessian(x)
    }

    fn has_hessian(&self) -> bool {
        self.0.has_hessian()
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants { sigma_f: 0.0, sigma_g: 0.0, sigma_h: Some(0.0), ..self.0.constants() }
    }
}

/// Runs `config.horizon` iterations from `y0`.
pub fn run(problem: &ProblemInstance, config: &SolverConfig, y0: &Point) -> Result<RunRecord> {
    config.validate()?;
    if y0.dim() != problem.domain.dim() || !problem.domain.contains(y0.as_slice(), FEASIBILITY_TOL) {
        return Err(Error::config("initial point is not feasible"));
    }
    let exact_available = problem.inner.exact(y0).is_some();
    let wrapped;
    let problem = if config.variant == Variant::DeterministicBasic {
        if !exact_available {
            return Err(Error::config("deterministic mode needs an exact oracle"));
        }
        wrapped = ProblemInstance { inner: Arc::new(ExactOracle(problem.inner.clone())), ..problem.clone() };
        &wrapped
    } else {
        problem
    };

    let (jac_kind, fn_kind) = config.variant.trackers();
    let clip = match config.variant {
        Variant::ClippedScfw { clip } => Some(clip),
        _ => None,
    };
    let horizon = config.horizon;
    let every = config.record_interval();
    let gap_params = config.glmo;
    let root = RngState::new(config.seed);
    let start = Instant::now();

    let mut state = TrackerState::init_with_clip(problem, y0, &mut root.substream(0), jac_kind, fn_kind, clip)?;
    let mut calls: u64 = 1;
    let mut y = y0.clone();
    let mut rows = Vec::new();
    let mut running_min = f64::INFINITY;
    let mut best = (f64::INFINITY, 0usize);

    let mut record = |k: usize, y: &Point, state: Option<&TrackerState>, inner: usize| -> Result<()> {
        if !exact_available {
            return Ok(());
        }
        let objective = problem.objective(y)?;
        let report = gap_report(problem, y, &gap_params)?;
        if report.gap < -GAP_TOL {
            log::warn!("step {k}: gap {:e} below tolerance", report.gap);
        }
        let shown = report.gap.max(0.0);
        if k >= 1 || horizon == 0 {
            running_min = running_min.min(shown);
            if shown < best.0 {
                best = (shown, k);
            }
        }
        let (dg, df) = match state {
            Some(s) => {
                let (a, b) = s.tracking_errors(problem, y)?;
                (Some(a), Some(b))
            }
            None => (None, None),
        };
        rows.push(TraceRow {
            k,
            objective,
            gap: report.gap,
            gap_running_min: if k == 0 { shown } else { running_min },
            delta_g_norm: dg,
            delta_f_norm: df,
            glmo_inner_iters: inner,
            elapsed_ns: if config.timing { start.elapsed().as_nanos() as u64 } else { 0 },
        });
        Ok(())
    };

    for k in 0..horizon {
        let (gamma, mut beta, mut rho) = config.schedule.values(k);
        if config.variant.forces_unit_weights() {
            beta = 1.0;
            rho = 1.0;
        }
        if k >= 1 {
            calls += state
                .advance(problem, &y, &mut root.substream(k as u64), beta, rho)
                .map_err(|e| Error::Step { step: k, source: Box::new(e) })?;
        }
        let surrogate = AffineSurrogate::new(state.z.clone(), state.v.clone(), y.clone())?;
        let res = solve_glmo(&problem.outer, &problem.domain, &surrogate, &config.glmo)
            .map_err(|e| Error::Step { step: k, source: Box::new(e) })?;
        if k % every == 0 {
            record(k, &y, Some(&state), res.inner_iterations)
                .map_err(|e| Error::Step { step: k, source: Box::new(e) })?;
        }
        let next: Vec<f64> = y
            .iter()
            .zip(res.x_star.iter())
            .map(|(a, b)| (1.0 - gamma) * a + gamma * b)
            .collect();
        y = Point::from_vec(next);
    }
    record(horizon, &y, None, 0).map_err(|e| Error::Step { step: horizon, source: Box::new(e) })?;
    if horizon == 0 {
        // nothing ran; the summary alone describes y0
        rows.clear();
    }

    Ok(RunRecord {
        rows,
        min_gap: if exact_available { best.0 } else { f64::NAN },
        argmin_k: best.1,
        total_oracle_calls: calls,
        gap_recorded: exact_available,
        final_point: y,
    })
}

/// Vanilla stochastic compositional Frank–Wolfe.
pub fn run_vanilla_scfw(problem: &ProblemInstance, config: &SolverConfig, y0: &Point) -> Result<RunRecord> {
    run(problem, &SolverConfig { variant: Variant::VanillaScfw, ..config.clone() }, y0)
}

/// Vanilla with the sampled Jacobian clipped at Frobenius norm `clip`.
pub fn run_clipped_scfw(problem: &ProblemInstance, config: &SolverConfig, y0: &Point, clip: f64) -> Result<RunRecord> {
    run(problem, &SolverConfig { variant: Variant::ClippedScfw { clip }, ..config.clone() }, y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::NoiseSpec;
    use crate::problems::{make_minimax_regression, MinimaxParams};

    fn small_problem(noise: NoiseSpec) -> ProblemInstance {
        let params = MinimaxParams { groups: 3, dim: 4, tau: 1.0, samples_per_group: 10, noise, ..MinimaxParams::small() };
        make_minimax_regression(&params, &mut RngState::new(3)).unwrap()
    }

    #[test]
    fn full_step_lands_on_glmo_output() {
        let p = small_problem(NoiseSpec::none());
        let y0 = p.domain.default_start();
        let cfg = SolverConfig::new(Variant::Variant1, Schedule::custom(vec![1.0], vec![1.0], vec![1.0]).unwrap(), 1, 0);
        let rec = run(&p, &cfg, &y0).unwrap();
        let s = p.exact(&y0).unwrap();
        let x1 = solve_glmo(&p.outer, &p.domain, &AffineSurrogate::new(s.value, s.jacobian, y0.clone()).unwrap(), &cfg.glmo)
            .unwrap()
            .x_star;
        assert_eq!(rec.final_point, x1);
    }

    #[test]
    fn zero_horizon_reports_start() {
        let p = small_problem(NoiseSpec::gaussian(0.1));
        let cfg = SolverConfig::new(Variant::VanillaScfw, Schedule::deterministic_convex(), 0, 0);
        let rec = run(&p, &cfg, &p.domain.default_start()).unwrap();
        assert!(rec.rows.is_empty());
        assert_eq!(rec.argmin_k, 0);
        assert!(rec.min_gap.is_finite());
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let p = small_problem(NoiseSpec::none());
        let cfg = SolverConfig::new(Variant::Variant1, Schedule::deterministic_convex(), 3, 0);
        let y0 = Point::from_vec(vec![2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(run(&p, &cfg, &y0), Err(Error::Config(_))));
    }

    #[test]
    fn hessian_variant_needs_hessian_oracle() {
        let mut rng = RngState::new(1);
        let params = crate::problems::CompletionParams { rows: 3, cols: 3, rank: 1, density: 1.0, ..crate::problems::CompletionParams::standard() };
        let p = crate::problems::make_matrix_completion(&params, &mut rng).unwrap();
        let cfg = SolverConfig::new(Variant::Hessian, Schedule::deterministic_convex(), 2, 0);
        assert!(run(&p, &cfg, &p.domain.default_start()).is_err());
    }
}
