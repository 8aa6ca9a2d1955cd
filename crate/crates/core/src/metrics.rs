//! Gap evaluation, curvature probing, theory constants and rate fitting.

use crate::error::{Error, Result};
use crate::glmo::{solve_glmo, AffineSurrogate, GlmoParams};
use crate::numerics::{vbe_constant, Point, RngState};
use crate::problems::ProblemInstance;

/// Inner-budget multiplier for gap evaluation on non-polyhedral domains.
pub const GAP_BUDGET_FACTOR: usize = 5;

/// Relative size below which a linearization residual is treated as rounding.
const ROUNDING_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport {
    pub objective: f64,
    pub gap: f64,
    pub inner_iterations: usize,
}

/// `φ(y)`, the generalized gap at `y` and the GLMO effort it took.
pub fn gap_report(problem: &ProblemInstance, y: &Point, params: &GlmoParams) -> Result<GapReport> {
    let exact = problem.exact(y)?;
    let objective = problem.outer.eval_point(&exact.value, y);
    let mut params = *params;
    if !problem.domain.is_polyhedral() {
        params.inner_budget *= GAP_BUDGET_FACTOR;
    }
    let s = AffineSurrogate::new(exact.value, exact.jacobian, y.clone())?;
    let res = solve_glmo(&problem.outer, &problem.domain, &s, &params)?;
    Ok(GapReport { objective, gap: objective - res.surrogate_value, inner_iterations: res.inner_iterations })
}

/// `Δ̂(y) = φ(y) − min_x F(f(y) + ∇f(y)(x − y), x)` with the exact oracle.
pub fn generalized_fw_gap(problem: &ProblemInstance, y: &Point, params: &GlmoParams) -> Result<f64> {
    Ok(gap_report(problem, y, params)?.gap)
}

/// `{1, 1/2, …, 2^{-10}}`.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=10).map(|i| 0.5f64.powi(i)).collect()
}

/// Monte Carlo lower estimate of the composite curvature.
///
/// Each pair draws `x` and `y` from a 50/50 mix of vertices and interior
/// points. Pairs whose linearization residual sits below floating-point
/// resolution are skipped, since `2/γ²` would otherwise amplify rounding.
pub fn curvature_probe(problem: &ProblemInstance, num_pairs: usize, gamma_grid: &[f64], rng: &mut RngState) -> Result<f64> {
    let mut best: f64 = 0.0;
    for _ in 0..num_pairs {
        let x = problem.domain.sample_mixed(rng);
        let y = problem.domain.sample_mixed(rng);
        let at_x = problem.exact(&x)?;
        let dir = y.sub(&x);
        let jd = at_x.jacobian.matvec(dir.as_slice());
        for &g in gamma_grid {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::config(format!("gamma {g} outside (0, 1]")));
            }
            let yg = x.lerp(&y, g);
            let actual = problem.exact(&yg)?.value;
            let lin = Point::from_vec(at_x.value.iter().zip(&jd).map(|(f, d)| f + g * d).collect());
            let scale = actual.norm() + lin.norm() + 1.0;
            if actual.distance(&lin) <= ROUNDING_FLOOR * scale {
                continue;
            }
            let diff = problem.outer.eval_point(&actual, &yg) - problem.outer.eval_point(&lin, &yg);
            best = best.max(2.0 * diff / (g * g));
        }
    }
    Ok(best)
}

/// Problem-level inputs to the theory constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryInputs {
    pub lf: f64,
    /// Componentwise smoothness, used in the curvature bound.
    pub l: f64,
    /// Frobenius Lipschitz constant of the Jacobian, used in the tracking bounds.
    pub l_jac: f64,
    pub g: Option<f64>,
    pub d: f64,
    pub n: usize,
    pub sigma_f: f64,
    pub sigma_g: f64,
    pub r: f64,
    pub phi0: f64,
    /// `E‖δ_{g,0}‖^r` and `E‖δ_{f,0}‖^r`.
    pub init_moment_g: f64,
    pub init_moment_f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryConstants {
    pub inputs: TheoryInputs,
    pub c_r: f64,
    pub s_bound: f64,
    pub e_g0: f64,
    pub e_f0: f64,
    pub e_f0_ii: f64,
    pub u_g: f64,
    pub u_f_i: Option<f64>,
    pub u_f_ii: f64,
    pub m_i: Option<f64>,
    pub m_ii: f64,
    pub k0: f64,
    pub q_g: f64,
    pub q_f_i: Option<f64>,
    pub q_f_ii: f64,
    pub p: f64,
    pub b: f64,
    pub a_cvx: f64,
}

impl TheoryConstants {
    pub fn from_inputs(t: TheoryInputs) -> Result<Self> {
        let r = t.r;
        let c_r = vbe_constant(r)?;
        let nonneg = [t.lf, t.l, t.l_jac, t.d, t.sigma_f, t.sigma_g, t.phi0, t.init_moment_f, t.init_moment_g];
        if nonneg.iter().any(|v| !(*v >= 0.0)) || t.g.is_some_and(|g| !(g >= 0.0)) {
            return Err(Error::config(format!("theory inputs must be nonnegative: {t:?}")));
        }
        let (lf, l, lj, d) = (t.lf, t.l, t.l_jac, t.d);
        let s_bound = lf * l * d * d * (t.n as f64).sqrt();
        let ex = (r - 1.0) / r;
        let root = |m: f64| m.powf(1.0 / r);
        let cr_root = c_r.powf(1.0 / r);

        let e_g0 = 3f64.powf(ex) * root(t.init_moment_g);
        let e_f0 = 3f64.powf(ex) * root(t.init_moment_f);
        let e_f0_ii = 4f64.powf(ex) * root(t.init_moment_f);
        let u_g = 3f64.powf(ex) * (lj * d).max(cr_root * t.sigma_g);
        let u_f_i = t.g.map(|g| 3f64.powf(ex) * (g * d).max(cr_root * t.sigma_f));
        let u_f_ii = 4f64.powf(ex) * (lj * d * d / 2.0).max(u_g * d).max(cr_root * t.sigma_f);

        let base = t.phi0 + 0.5 * s_bound + 2.0 * lf * d * (e_g0 + 2.0 * u_g);
        let m_i = u_f_i.map(|u| base + 2.0 * lf * (e_f0 + 2.0 * u));
        let m_ii = base + 2.0 * lf * (e_f0_ii + (3.0 + e_g0) * u_f_ii);

        let y = r / (2.0 * r - 1.0);
        let q = y * (r - 1.0);
        let k0 = (4.0 * q).powf(1.0 / (1.0 - y)).ceil() + 2.0;
        let m_g = 2f64.powf(r - 1.0) * 4f64.powf(r) * (lj * d).powf(r) + c_r * t.sigma_g.powf(r);
        let qbar_g = (k0.powf(q) * t.init_moment_g).max(2.0 * m_g);
        let q_g = root(qbar_g);
        let four_r = 4f64.powf(r);
        let m_f_ii = 4f64.powf(r - 1.0)
            * (four_r * lj.powf(r) * d.powf(2.0 * r) / 2f64.powf(r) + four_r * d.powf(r) * qbar_g + c_r * t.sigma_f.powf(r));
        let m_f_i = t.g.map(|g| 4f64.powf(r - 1.0) * (four_r * (g * d).powf(r) + c_r * t.sigma_f.powf(r)));
        let q_f = |m_f: f64| root((k0.powf(q) * t.init_moment_f).max(2.0 * m_f));
        let q_f_ii = q_f(m_f_ii);
        let q_f_i = m_f_i.map(q_f);

        let p = (r - 1.0) / (2.0 * r - 1.0);
        let b = 2.0 * s_bound + 4.0 * lf * (q_f_ii + d * q_g) * 2f64.powf(p);
        let a_cvx = (2f64.powf(p) * t.phi0).max(b / (2.0 - p));

        Ok(TheoryConstants {
            inputs: t,
            c_r,
            s_bound,
            e_g0,
            e_f0,
            e_f0_ii,
            u_g,
            u_f_i,
            u_f_ii,
            m_i,
            m_ii,
            k0,
            q_g,
            q_f_i,
            q_f_ii,
            p,
            b,
            a_cvx,
        })
    }

    /// `M_I`, which needs a Jacobian bound `G`.
    pub fn m_i(&self) -> Result<f64> {
        self.m_i.ok_or_else(|| Error::config("M_I needs a bound on the Jacobian norm (G)"))
    }
}

/// Evaluates every constant, estimating the initial moments by `draws` oracle calls at the default start.
pub fn compute_theory_constants(
    problem: &ProblemInstance,
    phi0: f64,
    r: f64,
    init_moment_draws: usize,
    rng: &mut RngState,
) -> Result<TheoryConstants> {
    if init_moment_draws == 0 {
        return Err(Error::config("need at least one draw for the initial moments"));
    }
    let c = problem.constants();
    let y0 = problem.domain.default_start();
    let exact = problem.exact(&y0)?;
    let (mut mg, mut mf) = (0.0, 0.0);
    for _ in 0..init_moment_draws {
        let s = problem.inner.query(&y0, rng);
        mg += s.jacobian.sub(&exact.jacobian).frobenius_norm().powf(r);
        mf += s.value.distance(&exact.value).powf(r);
    }
    let draws = init_moment_draws as f64;
    TheoryConstants::from_inputs(TheoryInputs {
        lf: problem.outer.lipschitz,
        l: c.smoothness,
        l_jac: c.jacobian_lipschitz,
        g: c.g_bound,
        d: problem.domain.diameter(),
        n: problem.outer.arity,
        sigma_f: c.sigma_f,
        sigma_g: c.sigma_g,
        r,
        phi0,
        init_moment_g: mg / draws,
        init_moment_f: mf / draws,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln K, ln min_gap)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through `(ln K, ln min_gap)`; nonpositive gaps are dropped.
pub fn fit_rate(results: &[(f64, f64)]) -> Result<RateFit> {
    let mut points = Vec::with_capacity(results.len());
    for &(k, g) in results {
        if g > 0.0 && k > 0.0 && g.is_finite() {
            points.push((k.ln(), g.ln()));
        } else {
            log::warn!("dropping rate point (K = {k}, gap = {g})");
        }
    }
    let mut ks: Vec<f64> = points.iter().map(|p| p.0).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::config("rate fit needs at least 3 distinct horizons with positive gaps"));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept, r_squared, points })
}

/// Right side of the constant-weight Jacobian tracking bound at step `k`.
pub fn jacobian_tracking_rhs(r: f64, k: usize, beta: f64, gamma: f64, l_jac: f64, d: f64, sigma_g: f64, init_moment: f64) -> Result<f64> {
    let c_r = vbe_constant(r)?;
    Ok(3f64.powf(r - 1.0)
        * ((1.0 - beta).powf(r * k as f64) * init_moment
            + (l_jac * d * gamma / beta).powf(r)
            + c_r * sigma_g.powf(r) * beta.powf(r - 1.0)))
}

/// Right side of the Polyak function tracking bound; `g` bounds the Jacobian norm.
pub fn function_tracking_rhs_polyak(r: f64, k: usize, rho: f64, gamma: f64, g: f64, d: f64, sigma_f: f64, init_moment: f64) -> Result<f64> {
    jacobian_tracking_rhs(r, k, rho, gamma, g, d, sigma_f, init_moment)
}

/// Right side of the Taylor function tracking bound; `max_jac_moment` is `max_{i≤k} E‖δ_{g,i}‖^r`.
#[allow(clippy::too_many_arguments)]
pub fn function_tracking_rhs_taylor(
    r: f64,
    k: usize,
    rho: f64,
    gamma: f64,
    l_jac: f64,
    d: f64,
    sigma_f: f64,
    init_moment: f64,
    max_jac_moment: f64,
) -> Result<f64> {
    let c_r = vbe_constant(r)?;
    let ratio = (d * gamma / rho).powf(r);
    Ok(4f64.powf(r - 1.0)
        * ((1.0 - rho).powf(r * k as f64) * init_moment
            + l_jac.powf(r) * d.powf(r) * ratio * gamma.powf(r) / 2f64.powf(r)
            + ratio * max_jac_moment
            + c_r * sigma_f.powf(r) * rho.powf(r - 1.0)))
}

/// Right side of the one-step descent inequality.
pub fn descent_rhs(phi_k: f64, gamma: f64, gap: f64, s: f64, lf: f64, d: f64, delta_f: f64, delta_g: f64) -> f64 {
    phi_k - gamma * gap + gamma * gamma * s / 2.0 + 2.0 * gamma * lf * (delta_f + d * delta_g)
}
