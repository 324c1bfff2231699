//! Range likelihoods `𝒱(r̃ | r̂)`.

use std::f64::consts::PI;

use crate::error::InitError;
use crate::scalar::Scalar;

/// Density of an observed range given a predicted one.
///
/// Implementations are generic over [`Scalar`] so the same code runs in the
/// filter and in the operation-counting harness. The density must be finite
/// and non-negative for finite inputs.
pub trait LikelihoodModel: Sync {
    fn evaluate<S: Scalar>(&self, observed: S, predicted: S) -> S;
}

/// Cauchy density with location at the predicted range and scale `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyLikelihood {
    sigma: f64,
    sigma_sq: f64,
    // σ/π
    norm: f64,
}

impl CauchyLikelihood {
    pub fn new(sigma: f64) -> Result<Self, InitError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(InitError::InvalidInput(format!("Cauchy scale must be positive, got {sigma}")));
        }
        Ok(CauchyLikelihood { sigma, sigma_sq: sigma * sigma, norm: sigma / PI })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl LikelihoodModel for CauchyLikelihood {
    #[inline(always)]
    fn evaluate<S: Scalar>(&self, observed: S, predicted: S) -> S {
        let d = observed - predicted;
        S::from_f64(self.norm).div(d * d + S::from_f64(self.sigma_sq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{count_ops, Tally};

    #[test]
    #[allow(clippy::approx_constant)]
    fn peak_and_half_width() {
        let l = CauchyLikelihood::new(1.0).unwrap();
        assert!((l.evaluate(5.0, 5.0) - 1.0 / PI).abs() < 1e-15);
        assert!((l.evaluate(5.0, 5.0) - 0.31831).abs() < 1e-5);
        assert!((l.evaluate(5.0, 6.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(l.evaluate(3.0, 4.5), l.evaluate(4.5, 3.0));
    }

    #[test]
    fn peak_scales_with_sigma() {
        let l = CauchyLikelihood::new(0.25).unwrap();
        assert!((l.evaluate(1.0, 1.0) - 1.0 / (PI * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(CauchyLikelihood::new(0.0).is_err());
        assert!(CauchyLikelihood::new(-1.0).is_err());
        assert!(CauchyLikelihood::new(f64::NAN).is_err());
    }

    #[test]
    fn cost_is_one_div() {
        let l = CauchyLikelihood::new(1.0).unwrap();
        let (_, c) = count_ops(|| l.evaluate(Tally(2.0), Tally(3.0)));
        assert_eq!((c.add, c.mul, c.div), (2, 1, 1));
    }
}
