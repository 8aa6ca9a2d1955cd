//! Experiment runner for the stochastic composite Frank–Wolfe library.
//!
//! Reads experiment configs, runs seed-replicated grids in parallel, writes
//! plot-ready CSV, and hosts the numbered acceptance checks.

pub mod acceptance;
pub mod config;
pub mod experiment;
pub mod gap;
pub mod output;
pub mod tasks;
