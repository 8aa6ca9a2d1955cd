//! The numbered acceptance criteria, each checked against an independent oracle.
//!
//! Every criterion returns a [`CriterionResult`] carrying the measured values;
//! a runtime error inside a check counts as a failure and its message becomes
//! the measurement.

mod appendix;
mod deterministic;
mod determinism;
mod invariants;
mod lemmas;
mod oracles;
mod rates;

use std::fmt;
use std::time::Instant;

use anyhow::Result;
use compfw_core::problems::{make_minimax_regression, MinimaxParams};
use compfw_core::solver::GAP_TOL;
use compfw_core::{ProblemInstance, RngState, RunRecord};

pub use rates::tune_clip;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub measured: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {} | {} | {:.1}s",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.measured,
            self.seconds
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Oracle equivalences, deterministic bounds, invariants, determinism.
    Unit,
    /// Tracker, STORM and Hessian lemma checks.
    Lemmas,
    /// Empirical rates and baseline ordering.
    Rates,
    All,
}

impl Suite {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Unit => &[2, 3, 4, 7, 9, 10],
            Suite::Lemmas => &[5, 6],
            Suite::Rates => &[1, 8],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "unit" => Suite::Unit,
            "lemmas" => Suite::Lemmas,
            "rates" => Suite::Rates,
            "all" => Suite::All,
            _ => anyhow::bail!("unknown suite '{s}' (expected unit, lemmas, rates or all)"),
        })
    }
}

/// Outcome of one check before timing is attached.
pub(crate) struct Outcome {
    pub passed: bool,
    pub measured: String,
}

fn title(id: u8) -> &'static str {
    match id {
        1 => "non-convex rate of Variant II",
        2 => "deterministic convex 2S/(K+1) bound",
        3 => "deterministic non-convex bound",
        4 => "GLMO and LP oracle equivalence",
        5 => "tracker lemma inequalities",
        6 => "STORM and Hessian unbiasedness and acceleration",
        7 => "gap and curvature invariants",
        8 => "baseline ordering",
        9 => "auxiliary inequality suite",
        10 => "end-to-end determinism",
        _ => "unknown criterion",
    }
}

/// Runs criterion `id`; `fast` shrinks grids and widens the rate bands.
pub fn run_criterion(id: u8, fast: bool) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => rates::nonconvex_rate(fast),
        2 => deterministic::convex_bound(fast),
        3 => deterministic::nonconvex_bound(),
        4 => oracles::equivalence(),
        5 => lemmas::tracking_lemmas(),
        6 => lemmas::storm_and_hessian(fast),
        7 => invariants::gap_and_curvature(),
        8 => rates::baseline_ordering(fast),
        9 => appendix::inequality_suite(),
        10 => determinism::end_to_end(),
        _ => Err(anyhow::anyhow!("no criterion {id}")),
    };
    let Outcome { passed, measured } =
        outcome.unwrap_or_else(|e| Outcome { passed: false, measured: format!("error: {e:#}") });
    CriterionResult { id, title: title(id), passed, measured, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_suite(suite: Suite, fast: bool) -> Vec<CriterionResult> {
    suite.criteria().iter().map(|&id| run_criterion(id, fast)).collect()
}

/// The five-group, `d = 20` minimax task on data seed 0.
pub(crate) fn task_one_small() -> Result<ProblemInstance> {
    Ok(make_minimax_regression(&MinimaxParams::small(), &mut RngState::new(0))?)
}

/// Smallest raw gap across the records, for the `Δ̂ ≥ −tol` invariant.
pub(crate) fn lowest_gap<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> f64 {
    records
        .into_iter()
        .flat_map(|r| r.rows.iter().map(|row| row.gap))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn gaps_nonnegative(lowest: f64) -> bool {
    lowest >= -GAP_TOL
}

pub(crate) fn available_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
