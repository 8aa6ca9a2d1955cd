//! `compfw gap`: the generalized gap at a user-supplied point.

use std::path::Path;

use anyhow::{bail, Context, Result};
use compfw_core::metrics::gap_report;
use compfw_core::{GlmoParams, Point, ProblemInstance};

/// One real per line; blank lines and `#` comments are skipped.
pub fn parse_point(text: &str) -> Result<Point> {
    let mut v = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let x: f64 = t.parse().with_context(|| format!("line {}: '{t}' is not a number", i + 1))?;
        if !x.is_finite() {
            bail!("line {}: coordinate is not finite", i + 1);
        }
        v.push(x);
    }
    Ok(Point::from_vec(v))
}

pub fn read_point(path: &Path) -> Result<Point> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_point(&text)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapAtPoint {
    pub objective: f64,
    pub gap: f64,
    pub glmo_inner_iters: usize,
}

/// Checks the dimension and feasibility of `y`, then evaluates `φ(y)` and `Δ̂(y)`.
pub fn gap_at_point(problem: &ProblemInstance, y: &Point) -> Result<GapAtPoint> {
    if y.dim() != problem.domain.dim() {
        bail!("point has {} coordinates but the domain has dimension {}", y.dim(), problem.domain.dim());
    }
    if !problem.domain.contains(y.as_slice(), compfw_core::solver::FEASIBILITY_TOL) {
        bail!("point lies outside the domain");
    }
    let rep = gap_report(problem, y, &GlmoParams::default())?;
    Ok(GapAtPoint { objective: rep.objective, gap: rep.gap, glmo_inner_iters: rep.inner_iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_files() {
        let p = parse_point("# start\n0.5\n\n-1e-3  # second\n").unwrap();
        assert_eq!(p.as_slice(), &[0.5, -1e-3]);
        assert!(parse_point("1\nabc\n").is_err());
        assert!(parse_point("inf\n").is_err());
    }
}
