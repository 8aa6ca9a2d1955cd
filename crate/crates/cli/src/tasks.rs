//! Builds problem instances from a task name and its `[task_params]` table.

use anyhow::{bail, Context, Result};
use compfw_core::problems::{
    make_custom_quadratic, make_cvar_portfolio, make_matrix_completion, make_minimax_regression, CompletionParams,
    MinimaxParams, PortfolioParams, QuadraticParams,
};
use compfw_core::{DomainSpec, NoiseSpec, OuterFunction, ProblemInstance, RngState};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::config::TaskKind;

/// Parses `none`, `gaussian:σ`, `laplace:b` or `pareto:scale:r[:tail_index]`.
pub fn parse_noise(text: &str) -> Result<NoiseSpec> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .with_context(|| format!("noise '{text}' is missing a parameter"))?
            .parse::<f64>()
            .with_context(|| format!("bad number in noise '{text}'"))
    };
    let spec = match (parts[0], parts.len()) {
        ("none", 1) => NoiseSpec::none(),
        ("gaussian", 2) => NoiseSpec::gaussian(num(1)?),
        ("laplace", 2) => NoiseSpec::laplace(num(1)?),
        ("pareto", 3) => NoiseSpec::symmetric_pareto(num(1)?, num(2)?),
        ("pareto", 4) => NoiseSpec::symmetric_pareto(num(1)?, num(2)?).with_tail_index(num(3)?),
        _ => bail!("unrecognized noise '{text}'"),
    };
    spec.validate()?;
    Ok(spec)
}

fn noise_field(text: &Option<String>, default: NoiseSpec) -> Result<NoiseSpec> {
    text.as_deref().map_or(Ok(default), parse_noise)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MinimaxTable {
    data_seed: Option<u64>,
    /// `small` (the default) or `standard`.
    preset: Option<String>,
    groups: Option<usize>,
    dim: Option<usize>,
    tau: Option<f64>,
    samples_per_group: Option<usize>,
    noise: Option<String>,
    heterogeneity: Option<f64>,
    group_noise: Option<Vec<f64>>,
    label_tail_index: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortfolioTable {
    data_seed: Option<u64>,
    assets: Option<usize>,
    alpha: Option<f64>,
    horizon: Option<usize>,
    noise: Option<String>,
    lo: Option<f64>,
    hi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompletionTable {
    data_seed: Option<u64>,
    rows: Option<usize>,
    cols: Option<usize>,
    rank: Option<usize>,
    density: Option<f64>,
    tau: Option<f64>,
    noise: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticTable {
    data_seed: Option<u64>,
    components: Option<usize>,
    dim: Option<usize>,
    eig_lo: Option<f64>,
    eig_hi: Option<f64>,
    linear_scale: Option<f64>,
    cubic_scale: Option<f64>,
    value_noise: Option<String>,
    jacobian_noise: Option<String>,
    hessian_noise: Option<f64>,
    /// `l1_ball` (default) or `box`.
    domain: Option<String>,
    radius: Option<f64>,
    lo: Option<f64>,
    hi: Option<f64>,
    /// `max` (default), `l1_norm_mean`, `linear_first` or `cvar`.
    outer: Option<String>,
    alpha: Option<f64>,
}

fn table<T: DeserializeOwned + Default>(params: &toml::Table) -> Result<T> {
    toml::Value::Table(params.clone()).try_into().context("invalid task_params")
}

/// Builds the instance; the data are drawn from `data_seed` (default 0).
pub fn build_problem(task: TaskKind, params: &toml::Table) -> Result<ProblemInstance> {
    let problem = match task {
        TaskKind::MinimaxRegression => {
            let t: MinimaxTable = table(params)?;
            let base = match t.preset.as_deref() {
                None | Some("small") => MinimaxParams::small(),
                Some("standard") => MinimaxParams::standard(),
                Some(other) => bail!("unknown minimax preset '{other}'"),
            };
            let p = MinimaxParams {
                groups: t.groups.unwrap_or(base.groups),
                dim: t.dim.unwrap_or(base.dim),
                tau: t.tau.unwrap_or(base.tau),
                samples_per_group: t.samples_per_group.unwrap_or(base.samples_per_group),
                noise: noise_field(&t.noise, base.noise)?,
                heterogeneity: t.heterogeneity.unwrap_or(base.heterogeneity),
                group_noise: t.group_noise.unwrap_or(base.group_noise),
                label_tail_index: t.label_tail_index.or(base.label_tail_index),
            };
            make_minimax_regression(&p, &mut RngState::new(t.data_seed.unwrap_or(0)))?
        }
        TaskKind::CvarPortfolio => {
            let t: PortfolioTable = table(params)?;
            let base = PortfolioParams::standard();
            let p = PortfolioParams {
                assets: t.assets.unwrap_or(base.assets),
                alpha: t.alpha.unwrap_or(base.alpha),
                horizon: t.horizon.unwrap_or(base.horizon),
                noise: noise_field(&t.noise, base.noise)?,
                lo: t.lo.unwrap_or(base.lo),
                hi: t.hi.unwrap_or(base.hi),
            };
            make_cvar_portfolio(&p, &mut RngState::new(t.data_seed.unwrap_or(0)))?
        }
        TaskKind::MatrixCompletion => {
            let t: CompletionTable = table(params)?;
            let base = CompletionParams::standard();
            let p = CompletionParams {
                rows: t.rows.unwrap_or(base.rows),
                cols: t.cols.unwrap_or(base.cols),
                rank: t.rank.unwrap_or(base.rank),
                density: t.density.unwrap_or(base.density),
                tau: t.tau.or(base.tau),
                noise: noise_field(&t.noise, base.noise)?,
            };
            make_matrix_completion(&p, &mut RngState::new(t.data_seed.unwrap_or(0)))?
        }
        TaskKind::CustomQuadratic => {
            let t: QuadraticTable = table(params)?;
            let base = QuadraticParams::convex(t.components.unwrap_or(3), t.dim.unwrap_or(5));
            let p = QuadraticParams {
                eig_lo: t.eig_lo.unwrap_or(base.eig_lo),
                eig_hi: t.eig_hi.unwrap_or(base.eig_hi),
                linear_scale: t.linear_scale.unwrap_or(base.linear_scale),
                cubic_scale: t.cubic_scale.unwrap_or(base.cubic_scale),
                value_noise: noise_field(&t.value_noise, base.value_noise)?,
                jacobian_noise: noise_field(&t.jacobian_noise, base.jacobian_noise)?,
                hessian_noise: t.hessian_noise.unwrap_or(base.hessian_noise),
                ..base
            };
            let domain = match t.domain.as_deref() {
                None | Some("l1_ball") => DomainSpec::l1_ball(p.dim, t.radius.unwrap_or(1.0))?,
                Some("box") => DomainSpec::box_domain(p.dim, t.lo.unwrap_or(-1.0), t.hi.unwrap_or(1.0))?,
                Some(other) => bail!("unknown domain '{other}' for custom_quadratic"),
            };
            let n = p.components;
            let outer = match t.outer.as_deref() {
                None | Some("max") => OuterFunction::max_of_components(n)?,
                Some("l1_norm_mean") => OuterFunction::l1_norm_mean(n)?,
                Some("linear_first") => OuterFunction::linear_first_component(n)?,
                Some("cvar") => OuterFunction::cvar(t.alpha.unwrap_or(0.95), n)?,
                Some(other) => bail!("unknown outer '{other}' for custom_quadratic"),
            };
            make_custom_quadratic(&p, domain, outer, &mut RngState::new(t.data_seed.unwrap_or(0)))?
        }
    };
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_strings() {
        assert!(parse_noise("none").unwrap().is_none());
        assert_eq!(parse_noise("gaussian:0.5").unwrap(), NoiseSpec::gaussian(0.5));
        assert_eq!(parse_noise("pareto:0.1:2").unwrap(), NoiseSpec::symmetric_pareto(0.1, 2.0));
        assert!(parse_noise("gaussian").is_err());
        assert!(parse_noise("cauchy:1").is_err());
    }

    #[test]
    fn every_task_builds_with_small_parameters() {
        let cases = [
            (TaskKind::MinimaxRegression, "groups = 2\ndim = 3\nsamples_per_group = 10"),
            (TaskKind::CvarPortfolio, "assets = 3\nhorizon = 8"),
            (TaskKind::MatrixCompletion, "rows = 4\ncols = 3\nrank = 1"),
            (TaskKind::CustomQuadratic, "components = 2\ndim = 3\ndomain = \"box\"\nouter = \"cvar\""),
        ];
        for (task, text) in cases {
            let params: toml::Table = toml::from_str(text).unwrap();
            build_problem(task, &params).unwrap();
        }
        let bad: toml::Table = toml::from_str("colour = 1").unwrap();
        assert!(build_problem(TaskKind::CvarPortfolio, &bad).is_err());
    }
}
