//! Dense linear algebra, seeded randomness, noise samplers and spectral helpers.

mod linalg;
mod noise;
mod rng;
mod spectral;

pub use linalg::{dot, norm2, DenseMatrix, Point};
pub use noise::{sample_noise_vector, NoiseFamily, NoiseSpec};
pub use rng::RngState;
pub use spectral::{nuclear_norm, operator_norm, singular_values, symmetric_operator_norm, top_singular_pair, SingularPair};
pub(crate) use spectral::power_iteration;

use crate::error::{Error, Result};

/// von Bahr–Esseen constant `C_r` for martingale differences.
///
/// Exactly 1 at `r = 2`; the classical constant 2 below.
pub fn vbe_constant(r: f64) -> Result<f64> {
    if !(r > 1.0 && r <= 2.0) {
        return Err(Error::config(format!("r must lie in (1, 2], got {r}")));
    }
    Ok(if r == 2.0 { 1.0 } else { 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vbe_branches() {
        assert_eq!(vbe_constant(2.0).unwrap(), 1.0);
        assert_eq!(vbe_constant(1.5).unwrap(), 2.0);
        assert_eq!(vbe_constant(2.0 - 1e-12).unwrap(), 2.0);
        assert!(vbe_constant(1.0).is_err());
        assert!(vbe_constant(2.5).is_err());
    }
}
