use super::{Point, RngState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseFamily {
    None,
    Gaussian,
    /// `S * scale * (P - E[P])` with `S` a Rademacher sign and `P ~ Pareto(tail_index)`.
    SymmetricPareto,
    Laplace,
}

/// Additive oracle-noise model with a bounded `moment_order`-th moment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub scale: f64,
    pub tail_index: f64,
    pub moment_order: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            family: NoiseFamily::None,
            scale: 0.0,
            tail_index: f64::INFINITY,
            moment_order: 2.0,
        }
    }

    pub fn gaussian(scale: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::Gaussian,
            scale,
            ..NoiseSpec::none()
        }
    }

    pub fn laplace(scale: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::Laplace,
            scale,
            ..NoiseSpec::none()
        }
    }

    /// Heavy-tailed noise with finite `r`-th moment; tail index defaults to `r + 0.5`.
    pub fn symmetric_pareto(scale: f64, r: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::SymmetricPareto,
            scale,
            tail_index: r + 0.5,
            moment_order: r,
        }
    }

    pub fn with_tail_index(mut self, tail_index: f64) -> Self {
        self.tail_index = tail_index;
        self
    }

    pub fn is_none(&self) -> bool {
        self.family == NoiseFamily::None
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(Error::config(format!("noise scale must be >= 0, got {}", self.scale)));
        }
        if !(self.moment_order > 1.0 && self.moment_order <= 2.0) {
            return Err(Error::config(format!(
                "moment order r must lie in (1, 2], got {}",
                self.moment_order
            )));
        }
        if self.family == NoiseFamily::SymmetricPareto && self.tail_index <= self.moment_order {
            return Err(Error::config(format!(
                "pareto tail index {} must exceed moment order {} for a finite r-th moment",
                self.tail_index, self.moment_order
            )));
        }
        Ok(())
    }

    /// One mean-zero scalar draw.
    pub fn sample_scalar(&self, rng: &mut RngState) -> f64 {
        match self.family {
            NoiseFamily::None => 0.0,
            NoiseFamily::Gaussian => self.scale * rng.normal(),
            NoiseFamily::Laplace => {
                let u = rng.uniform_open() - 0.5;
                -self.scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            NoiseFamily::SymmetricPareto => {
                let a = self.tail_index;
                let p = rng.uniform_open().powf(-1.0 / a);
                let mean = a / (a - 1.0);
                rng.sign() * self.scale * (p - mean)
            }
        }
    }

    /// Adds i.i.d. draws to every entry of `out`.
    pub fn perturb(&self, out: &mut [f64], rng: &mut RngState) {
        if self.family == NoiseFamily::None || self.scale == 0.0 {
            return;
        }
        for v in out {
            *v += self.sample_scalar(rng);
        }
    }

    /// Per-entry variance, when finite.
    pub fn entry_variance(&self) -> Option<f64> {
        let s2 = self.scale * self.scale;
        match self.family {
            NoiseFamily::None => Some(0.0),
            NoiseFamily::Gaussian => Some(s2),
            NoiseFamily::Laplace => Some(2.0 * s2),
            NoiseFamily::SymmetricPareto => {
                let a = self.tail_index;
                (a > 2.0).then(|| s2 * a / ((a - 1.0) * (a - 1.0) * (a - 2.0)))
            }
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::none()
    }
}

/// Vector of `dim` i.i.d. mean-zero draws from `spec`.
pub fn sample_noise_vector(spec: &NoiseSpec, dim: usize, rng: &mut RngState) -> Result<Point> {
    spec.validate()?;
    if dim == 0 {
        return Err(Error::config("noise dimension must be >= 1"));
    }
    let mut v = vec![0.0; dim];
    spec.perturb(&mut v, rng);
    Ok(Point::from_vec(v))
}
