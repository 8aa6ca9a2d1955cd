//! Momentum estimators of `∇f(y_k)` (Jacobian trackers) and `f(y_k)` (function trackers).

mod schedule;

pub use schedule::{schedule_values, Schedule, ScheduleKind};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Point, RngState};
use crate::problems::ProblemInstance;

/// Stream index reserved for the Hessian correction draws `(α_k, ζ_k)`.
const HESSIAN_SUBSTREAM: u64 = 0x4845_5353;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JacKind {
    /// `V_k = (1−β)V_{k−1} + β∇f̃(y_k; ξ_k)`.
    Polyak,
    /// `V_k = ∇f̃(y_k; ξ_k) + (1−β)(V_{k−1} − ∇f̃(y_{k−1}; ξ_k))`.
    Storm,
    /// Polyak plus `(1−β)H̃_k(y_k − y_{k−1})` at a random point of the last segment.
    HessianCorrected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FnKind {
    /// `z_k = (1−ρ)z_{k−1} + ρf̃(y_k; ξ_k)`.
    Polyak,
    /// `z_k = (1−ρ)[z_{k−1} + V_k(y_k − y_{k−1})] + ρf̃(y_k; ξ_k)`.
    Taylor,
}

/// Momentum state `(V_k, z_k)` plus what the corrected updates need.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackerState {
    pub v: DenseMatrix,
    pub z: Point,
    pub prev_y: Option<Point>,
    pub jac_kind: JacKind,
    pub fn_kind: FnKind,
    pub step_index: usize,
    /// Frobenius-norm cap applied to each sampled Jacobian before it is used.
    pub jacobian_clip: Option<f64>,
}

/// `(1−w)·a + w·b`, entrywise.
fn blend(a: &mut [f64], b: &[f64], w: f64) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = (1.0 - w) * *x + w * y;
    }
}

/// Rescales `j` to Frobenius norm at most `c`.
pub fn clip_jacobian(j: &mut DenseMatrix, c: f64) {
    let nrm = j.frobenius_norm();
    if nrm > c {
        j.scale_in_place(c / nrm);
    }
}

impl TrackerState {
    /// Initializes `V₀` and `z₀` from a single draw at `y₀`.
    pub fn init(
        problem: &ProblemInstance,
        y0: &Point,
        rng: &mut RngState,
        jac_kind: JacKind,
        fn_kind: FnKind,
    ) -> Result<Self> {
        TrackerState::init_with_clip(problem, y0, rng, jac_kind, fn_kind, None)
    }

    pub fn init_with_clip(
        problem: &ProblemInstance,
        y0: &Point,
        rng: &mut RngState,
        jac_kind: JacKind,
        fn_kind: FnKind,
        jacobian_clip: Option<f64>,
    ) -> Result<Self> {
        if y0.dim() != problem.inner.dim_x() {
            return Err(Error::contract("initial point has the wrong dimension"));
        }
        if jac_kind == JacKind::HessianCorrected && !problem.inner.has_hessian() {
            return Err(Error::config(format!(
                "problem '{}' has no Hessian oracle; the Hessian-corrected tracker is unavailable",
                problem.name
            )));
        }
        let mut s = problem.inner.query(y0, rng);
        if let Some(c) = jacobian_clip {
            clip_jacobian(&mut s.jacobian, c);
        }
        Ok(TrackerState {
            v: s.jacobian,
            z: s.value,
            prev_y: Some(y0.clone()),
            jac_kind,
            fn_kind,
            step_index: 0,
            jacobian_clip,
        })
    }

    fn prev(&self) -> Result<&Point> {
        self.prev_y
            .as_ref()
            .ok_or_else(|| Error::contract("tracker update needs the previous iterate"))
    }

    pub fn update_jacobian_polyak(&mut self, sample_jac: &DenseMatrix, beta: f64) {
        blend(self.v.as_mut_slice(), sample_jac.as_slice(), beta);
        self.step_index += 1;
    }

    /// STORM step from `∇f̃(y_k; ξ)` and `∇f̃(y_{k−1}; ξ)` under one sample `ξ`.
    pub fn update_jacobian_storm(&mut self, jac_at_y: &DenseMatrix, jac_at_prev: &DenseMatrix, beta: f64) -> Result<()> {
        self.prev()?;
        let keep = 1.0 - beta;
        for ((v, a), b) in self.v.as_mut_slice().iter_mut().zip(jac_at_y.as_slice()).zip(jac_at_prev.as_slice()) {
            *v = a + keep * (*v - b);
        }
        self.step_index += 1;
        Ok(())
    }

    /// Hessian-corrected step; `correction` holds `H̃_i(y_k − y_{k−1})` in row `i`.
    pub fn update_jacobian_hessian(&mut self, sample_jac: &DenseMatrix, correction: &DenseMatrix, beta: f64) -> Result<()> {
        self.prev()?;
        let keep = 1.0 - beta;
        for ((v, j), c) in self.v.as_mut_slice().iter_mut().zip(sample_jac.as_slice()).zip(correction.as_slice()) {
            *v = keep * *v + beta * j + keep * c;
        }
        self.step_index += 1;
        Ok(())
    }

    pub fn update_function_polyak(&mut self, sample_f: &Point, rho: f64) {
        blend(self.z.as_mut_slice(), sample_f.as_slice(), rho);
    }

    /// Taylor-corrected step using the current `V_k`; refreshes `prev_y` to `y_k`.
    pub fn update_function_taylor(&mut self, y_k: &Point, sample_f: &Point, rho: f64) -> Result<()> {
        let disp = y_k.sub(self.prev()?);
        let drift = self.v.matvec(disp.as_slice());
        let keep = 1.0 - rho;
        for ((z, d), f) in self.z.as_mut_slice().iter_mut().zip(&drift).zip(sample_f.iter()) {
            *z = keep * (*z + d) + rho * f;
        }
        self.prev_y = Some(y_k.clone());
        Ok(())
    }

    /// One tracker step at `y_k`, drawing every sample from `rng`. Returns the number of oracle calls.
    pub fn advance(
        &mut self,
        problem: &ProblemInstance,
        y_k: &Point,
        rng: &mut RngState,
        beta: f64,
        rho: f64,
    ) -> Result<u64> {
        let oracle = &problem.inner;
        let mut calls = 1;
        let sample_f = match self.jac_kind {
            JacKind::Polyak => {
                let mut s = oracle.query(y_k, rng);
                if let Some(c) = self.jacobian_clip {
                    clip_jacobian(&mut s.jacobian, c);
                }
                self.update_jacobian_polyak(&s.jacobian, beta);
                s.value
            }
            JacKind::Storm => {
                let prev = self.prev()?.clone();
                let mut replay = rng.clone();
                let at_y = oracle.query(y_k, rng);
                let at_prev = oracle.query(&prev, &mut replay);
                calls += 1;
                self.update_jacobian_storm(&at_y.jacobian, &at_prev.jacobian, beta)?;
                at_y.value
            }
            JacKind::HessianCorrected => {
                let prev = self.prev()?.clone();
                let mut hrng = rng.substream(HESSIAN_SUBSTREAM);
                let s = oracle.query(y_k, rng);
                let disp = y_k.sub(&prev);
                let alpha = hrng.uniform();
                let y_alpha = prev.lerp(y_k, alpha);
                let slices = oracle.hessian_query(&y_alpha, &mut hrng).ok_or_else(|| {
                    Error::config(format!("problem '{}' has no Hessian oracle", problem.name))
                })?;
                calls += 1;
                let mut corr = DenseMatrix::zeros(self.v.rows(), self.v.cols());
                for (i, h) in slices.iter().enumerate() {
                    corr.row_mut(i).copy_from_slice(&h.matvec(disp.as_slice()));
                }
                self.update_jacobian_hessian(&s.jacobian, &corr, beta)?;
                s.value
            }
        };
        match self.fn_kind {
            FnKind::Polyak => self.update_function_polyak(&sample_f, rho),
            FnKind::Taylor => self.update_function_taylor(y_k, &sample_f, rho)?,
        }
        self.prev_y = Some(y_k.clone());
        Ok(calls)
    }

    /// `(‖V − ∇f(y)‖_F, ‖z − f(y)‖)` against the exact oracle.
    pub fn tracking_errors(&self, problem: &ProblemInstance, y: &Point) -> Result<(f64, f64)> {
        let exact = problem.exact(y)?;
        Ok((self.v.sub(&exact.jacobian).frobenius_norm(), self.z.distance(&exact.value)))
    }
}
