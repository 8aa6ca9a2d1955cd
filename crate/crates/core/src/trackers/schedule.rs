use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    /// `γ = K^{−(2r−1)/(3r−2)}`, `β = ρ = K^{−r/(3r−2)}`.
    NonconvexConstant { horizon: usize, r: f64 },
    /// `γ_k = 2/(k+2)`, `β_k = ρ_k = min{1, c0/(k+k0)^{r/(2r−1)}}`.
    ConvexDecreasing { c0: f64, k0: f64, r: f64 },
    /// `γ_k = 1/√(k+1)`, `β = ρ = 1`.
    DeterministicNonconvex,
    /// `γ_k = 2/(k+2)`, `β = ρ = 1`.
    DeterministicConvex,
    /// `γ = β = ρ = K^{−r/(2r−1)}`.
    StormConstant { horizon: usize, r: f64 },
    /// Explicit sequences; a single entry is a constant, longer sequences hold their last value.
    Custom { gamma: Vec<f64>, beta: Vec<f64>, rho: Vec<f64> },
}

/// Step size `γ_k` and momentum weights `β_k`, `ρ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
}

fn check_r(r: f64) -> Result<()> {
    if r > 1.0 && r <= 2.0 {
        Ok(())
    } else {
        Err(Error::config(format!("moment order r must lie in (1, 2], got {r}")))
    }
}

fn check_horizon(k: usize) -> Result<()> {
    if k >= 1 {
        Ok(())
    } else {
        Err(Error::config("schedule horizon must be >= 1"))
    }
}

impl Schedule {
    pub fn nonconvex_constant(horizon: usize, r: f64) -> Result<Self> {
        Schedule { kind: ScheduleKind::NonconvexConstant { horizon, r } }.validated()
    }

    /// Decreasing schedule with `c0 = 1` and `k0 = ⌈(4q)^{1/(1−y)}⌉ + 2`,
    /// where `y = r/(2r−1)` and `q = y(r−1)`.
    pub fn convex_decreasing(r: f64) -> Result<Self> {
        check_r(r)?;
        let y = r / (2.0 * r - 1.0);
        let q = y * (r - 1.0);
        let k0 = (4.0 * q).powf(1.0 / (1.0 - y)).ceil() + 2.0;
        Schedule { kind: ScheduleKind::ConvexDecreasing { c0: 1.0, k0, r } }.validated()
    }

    pub fn deterministic_nonconvex() -> Self {
        Schedule { kind: ScheduleKind::DeterministicNonconvex }
    }

    pub fn deterministic_convex() -> Self {
        Schedule { kind: ScheduleKind::DeterministicConvex }
    }

    pub fn storm_constant(horizon: usize, r: f64) -> Result<Self> {
        Schedule { kind: ScheduleKind::StormConstant { horizon, r } }.validated()
    }

    pub fn custom(gamma: Vec<f64>, beta: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        Schedule { kind: ScheduleKind::Custom { gamma, beta, rho } }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match &self.kind {
            ScheduleKind::NonconvexConstant { horizon, r } | ScheduleKind::StormConstant { horizon, r } => {
                check_horizon(*horizon)?;
                check_r(*r)?;
            }
            ScheduleKind::ConvexDecreasing { c0, k0, r } => {
                check_r(*r)?;
                if !(*c0 > 0.0 && *k0 >= 0.0) {
                    return Err(Error::config("convex schedule needs c0 > 0 and k0 >= 0"));
                }
            }
            ScheduleKind::Custom { gamma, beta, rho } => {
                for seq in [gamma, beta, rho] {
                    if seq.is_empty() || seq.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
                        return Err(Error::config("custom schedule values must lie in (0, 1]"));
                    }
                }
            }
            ScheduleKind::DeterministicNonconvex | ScheduleKind::DeterministicConvex => {}
        }
        Ok(self)
    }

    /// `(γ_k, β_k, ρ_k)` at step `k`.
    pub fn values(&self, k: usize) -> (f64, f64, f64) {
        let kf = k as f64;
        match &self.kind {
            ScheduleKind::NonconvexConstant { horizon, r } => {
                let kk = *horizon as f64;
                let gamma = kk.powf(-(2.0 * r - 1.0) / (3.0 * r - 2.0));
                let beta = kk.powf(-r / (3.0 * r - 2.0));
                (gamma, beta, beta)
            }
            ScheduleKind::ConvexDecreasing { c0, k0, r } => {
                let beta = (c0 / (kf + k0).powf(r / (2.0 * r - 1.0))).min(1.0);
                (2.0 / (kf + 2.0), beta, beta)
            }
            ScheduleKind::DeterministicNonconvex => (1.0 / (kf + 1.0).sqrt(), 1.0, 1.0),
            ScheduleKind::DeterministicConvex => (2.0 / (kf + 2.0), 1.0, 1.0),
            ScheduleKind::StormConstant { horizon, r } => {
                let v = (*horizon as f64).powf(-r / (2.0 * r - 1.0));
                (v, v, v)
            }
            ScheduleKind::Custom { gamma, beta, rho } => {
                let at = |s: &Vec<f64>| s[k.min(s.len() - 1)];
                (at(gamma), at(beta), at(rho))
            }
        }
    }
}

/// Schedule values at `k` for a horizon-`K` run.
pub fn schedule_values(s: &Schedule, k: usize, horizon: usize) -> Result<(f64, f64, f64)> {
    if k >= horizon {
        return Err(Error::contract(format!("step {k} outside horizon {horizon}")));
    }
    Ok(s.values(k))
}
