//! Shared fixtures for the benchmarks.

use compfw_core::problems::{
    make_cvar_portfolio, make_matrix_completion, make_minimax_regression, CompletionParams, MinimaxParams, PortfolioParams,
};
use compfw_core::{AffineSurrogate, ProblemInstance, RngState};

/// The three benchmark tasks at their default sizes, generated from data seed 0.
pub fn tasks() -> Vec<ProblemInstance> {
    let mut rng = RngState::new(0);
    vec![
        make_minimax_regression(&MinimaxParams::standard(), &mut rng).expect("minimax task"),
        make_cvar_portfolio(&PortfolioParams::standard(), &mut rng).expect("portfolio task"),
        make_matrix_completion(&CompletionParams::standard(), &mut rng).expect("completion task"),
    ]
}

/// Exact affine surrogate at a random feasible point.
pub fn surrogate(p: &ProblemInstance, seed: u64) -> AffineSurrogate {
    let y = p.domain.sample_mixed(&mut RngState::new(seed));
    let s = p.exact(&y).expect("exact oracle");
    AffineSurrogate::new(s.value, s.jacobian, y).expect("surrogate shapes")
}
