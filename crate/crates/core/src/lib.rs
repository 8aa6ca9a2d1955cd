//! Stochastic Frank–Wolfe for fully composite problems `min_{x∈X} F(f(x), x)`.
//!
//! The inner map `f` is only reachable through a noisy oracle; the outer
//! function `F` is deterministic and may be non-smooth. Each iteration
//! tracks `f(y_k)` and `∇f(y_k)` with momentum estimators, minimizes `F` over
//! the domain on the tracked affine surrogate (a generalized linear
//! minimization oracle), and takes a convex-combination step.

pub mod error;
pub mod glmo;
pub mod lp;
pub mod metrics;
pub mod numerics;
pub mod problems;
pub mod solver;
pub mod trackers;

pub use error::{Error, Result};
pub use glmo::{AffineSurrogate, GlmoParams, GlmoResult};
pub use numerics::{DenseMatrix, NoiseFamily, NoiseSpec, Point, RngState};
pub use problems::{DomainSpec, InnerOracle, OracleConstants, OracleSample, OuterFunction, OuterKind, ProblemInstance, Regularizer};
pub use solver::{RunRecord, SolverConfig, TraceRow, Variant};
pub use trackers::{FnKind, JacKind, Schedule, ScheduleKind, TrackerState};
