//! Per-particle threshold resampling from a Gaussian proposal.

use nalgebra::{Cholesky, Matrix4, Vector4};

use super::{InitializerConfig, Particle};
use crate::error::InitError;
use crate::normal::NormalSource;
use crate::state::{wrap_angle, Covariance4, StateVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResampleReport {
    pub resampled: usize,
    /// The proposal factor needed diagonal jitter.
    pub jittered: bool,
}

/// Lower Cholesky factor of `p`. On failure retries once with
/// `p + εI`, `ε = 1e-12·trace(p)`. A zero matrix factors to zero.
pub fn cholesky_with_jitter(p: &Covariance4) -> Result<(Matrix4<f64>, bool), InitError> {
    let m = *p.matrix();
    if let Some(c) = Cholesky::new(m) {
        return Ok((c.l(), false));
    }
    let trace = p.trace();
    if trace == 0.0 && m.iter().all(|v| *v == 0.0) {
        return Ok((Matrix4::zeros(), false));
    }
    let eps = 1e-12 * trace;
    if eps > 0.0 && eps.is_finite() {
        if let Some(c) = Cholesky::new(m + Matrix4::identity() * eps) {
            return Ok((c.l(), true));
        }
    }
    Err(InitError::Cholesky { trace })
}

/// Replaces every particle with weight below `gamma / N` by a draw from
/// `𝒩(mean, alpha² cov)` with weight `1/N`, then renormalizes the set.
pub fn resample_particles<N: NormalSource + ?Sized>(
    particles: &mut [Particle],
    mean: &StateVector,
    cov: &Covariance4,
    config: &InitializerConfig,
    normals: &mut N,
) -> Result<ResampleReport, InitError> {
    let n = particles.len();
    if n == 0 {
        return Ok(ResampleReport::default());
    }
    let threshold = config.gamma / n as f64;
    if !particles.iter().any(|p| p.weight < threshold) {
        return Ok(ResampleReport::default());
    }
    let (l, jittered) = cholesky_with_jitter(cov)?;
    let scaled = l * config.alpha;
    let mu = mean.to_vector();
    let fresh_weight = 1.0 / n as f64;

    let mut resampled = 0;
    for p in particles.iter_mut().filter(|p| p.weight < threshold) {
        let draw =
            Vector4::new(normals.next_normal(), normals.next_normal(), normals.next_normal(), normals.next_normal());
        let x = mu + scaled * draw;
        *p = Particle::new([x[0], x[1], x[2]], wrap_angle(x[3]), fresh_weight);
        resampled += 1;
    }

    let total: f64 = particles.iter().map(|p| p.weight).sum();
    for p in particles.iter_mut() {
        p.weight /= total;
    }
    Ok(ResampleReport { resampled, jittered })
}
