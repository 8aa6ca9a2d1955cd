//! Experiment configuration files.
//!
//! A config is flat key/value text in TOML syntax: top-level keys for the
//! task and grids, a `[task_params]` table, and one `[[algorithms]]` table per
//! solver template.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use compfw_core::{GlmoParams, Schedule, SolverConfig, Variant};
use serde::Deserialize;

/// Environment variable that replaces the configured seeds.
pub const SEED_ENV: &str = "COMPFW_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    MinimaxRegression,
    CvarPortfolio,
    MatrixCompletion,
    CustomQuadratic,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    #[serde(default)]
    pub task_params: toml::Table,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(rename = "K_grid")]
    pub k_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Variant1,
    Variant2,
    Storm,
    Hessian,
    VanillaScfw,
    ClippedScfw,
    DeterministicBasic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    NonconvexConstant,
    ConvexDecreasing,
    DeterministicNonconvex,
    DeterministicConvex,
    StormConstant,
    Custom,
}

/// A solver template; the horizon and seed come from the grids.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub variant: VariantName,
    /// Name used in output files; defaults to the variant name.
    pub label: Option<String>,
    /// Defaults to `storm_constant` for STORM, `deterministic_nonconvex` for
    /// the deterministic method and `nonconvex_constant` otherwise.
    pub schedule: Option<ScheduleName>,
    #[serde(default = "default_r")]
    pub r: f64,
    /// Jacobian clip threshold, required by `clipped_scfw`.
    pub clip: Option<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub rho: Vec<f64>,
    pub record_every: Option<usize>,
    pub glmo_inner_budget: Option<usize>,
    pub glmo_smoothing_mu: Option<f64>,
    #[serde(default)]
    pub timing: bool,
}

fn default_r() -> f64 {
    2.0
}

impl AlgorithmSpec {
    pub fn new(variant: VariantName) -> Self {
        AlgorithmSpec {
            variant,
            label: None,
            schedule: None,
            r: 2.0,
            clip: None,
            gamma: Vec::new(),
            beta: Vec::new(),
            rho: Vec::new(),
            record_every: None,
            glmo_inner_budget: None,
            glmo_smoothing_mu: None,
            timing: false,
        }
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let name = match self.variant {
            VariantName::Variant1 => "variant1",
            VariantName::Variant2 => "variant2",
            VariantName::Storm => "storm",
            VariantName::Hessian => "hessian",
            VariantName::VanillaScfw => "vanilla_scfw",
            VariantName::ClippedScfw => "clipped_scfw",
            VariantName::DeterministicBasic => "deterministic_basic",
        };
        name.to_string()
    }

    fn variant(&self) -> Result<Variant> {
        Ok(match self.variant {
            VariantName::Variant1 => Variant::Variant1,
            VariantName::Variant2 => Variant::Variant2,
            VariantName::Storm => Variant::Storm,
            VariantName::Hessian => Variant::Hessian,
            VariantName::VanillaScfw => Variant::VanillaScfw,
            VariantName::ClippedScfw => match self.clip {
                Some(clip) => Variant::ClippedScfw { clip },
                None => bail!("clipped_scfw needs a `clip` threshold"),
            },
            VariantName::DeterministicBasic => Variant::DeterministicBasic,
        })
    }

    fn schedule(&self, horizon: usize) -> Result<Schedule> {
        let name = self.schedule.unwrap_or(match self.variant {
            VariantName::Storm => ScheduleName::StormConstant,
            VariantName::DeterministicBasic => ScheduleName::DeterministicNonconvex,
            _ => ScheduleName::NonconvexConstant,
        });
        if name != ScheduleName::Custom && !(self.gamma.is_empty() && self.beta.is_empty() && self.rho.is_empty()) {
            bail!("gamma/beta/rho sequences are only read by the custom schedule");
        }
        Ok(match name {
            ScheduleName::NonconvexConstant => Schedule::nonconvex_constant(horizon, self.r)?,
            ScheduleName::ConvexDecreasing => Schedule::convex_decreasing(self.r)?,
            ScheduleName::DeterministicNonconvex => Schedule::deterministic_nonconvex(),
            ScheduleName::DeterministicConvex => Schedule::deterministic_convex(),
            ScheduleName::StormConstant => Schedule::storm_constant(horizon, self.r)?,
            ScheduleName::Custom => Schedule::custom(self.gamma.clone(), self.beta.clone(), self.rho.clone())?,
        })
    }

    /// The concrete solver configuration for one grid cell.
    pub fn solver_config(&self, horizon: usize, seed: u64) -> Result<SolverConfig> {
        let defaults = GlmoParams::default();
        let mut cfg = SolverConfig::new(self.variant()?, self.schedule(horizon.max(1))?, horizon, seed);
        cfg.record_every = self.record_every;
        cfg.timing = self.timing;
        cfg.glmo = GlmoParams {
            inner_budget: self.glmo_inner_budget.unwrap_or(defaults.inner_budget),
            smoothing_mu: self.glmo_smoothing_mu.unwrap_or(defaults.smoothing_mu),
            ..defaults
        };
        cfg.validate().with_context(|| format!("algorithm '{}'", self.label()))?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies the seed override from the environment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.seeds = parse_seed_list(&v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() || self.k_grid.is_empty() || self.seeds.is_empty() {
            bail!("algorithms, K_grid and seeds must all be nonempty");
        }
        let mut labels = HashSet::new();
        for a in &self.algorithms {
            if !labels.insert(a.label()) {
                bail!("duplicate algorithm label '{}'", a.label());
            }
            if a.label().is_empty() || a.label().contains(['/', '\\', ',']) {
                bail!("algorithm label '{}' must be nonempty without '/', '\\' or ','", a.label());
            }
            for &k in &self.k_grid {
                a.solver_config(k, 0)?;
            }
        }
        let unique: HashSet<_> = self.seeds.iter().collect();
        if unique.len() != self.seeds.len() {
            bail!("seeds must be distinct");
        }
        Ok(())
    }
}

/// Comma-separated unsigned seeds.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>> {
    let seeds = text
        .split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad seed '{s}' in {SEED_ENV}")))
        .collect::<Result<Vec<_>>>()?;
    if seeds.is_empty() {
        bail!("{SEED_ENV} lists no seeds");
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
task = "minimax_regression"
K_grid = [16]
seeds = [1]

[[algorithms]]
variant = "variant2"
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.task, TaskKind::MinimaxRegression);
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
        assert_eq!(cfg.algorithms[0].label(), "variant2");
    }

    #[test]
    fn clipped_without_threshold_is_rejected() {
        let text = MINIMAL.replace("variant2", "clipped_scfw");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn unknown_keys_and_empty_grids_are_rejected() {
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}\nbogus = 1")).is_err());
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("[16]", "[]")).is_err());
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let text = format!("{MINIMAL}\n[[algorithms]]\nvariant = \"variant2\"\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seed_list("3, 4,5").unwrap(), vec![3, 4, 5]);
        assert!(parse_seed_list("x").is_err());
    }
}
