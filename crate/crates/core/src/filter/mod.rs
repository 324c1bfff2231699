//! Particle filter over the static initial state `x₀ = [p₀, θ₀]`.
//!
//! Particles are hypotheses of where the agent started and which way it was
//! facing. Because they never move, every particle's heading cosine and sine
//! are computed once (at seeding or resampling) and the ranging update runs
//! without trigonometry: the dead reckoning lives in the zero frame and is
//! rotated onto each hypothesis with the cached values.

mod kernels;
mod resample;
mod seed;
mod snapshot;

use serde::{Deserialize, Serialize};

use crate::dead_reckoning::{system_matrix, DeadReckoningIncrement, DeadReckoningTrack};
use crate::error::InitError;
use crate::likelihood::LikelihoodModel;
use crate::normal::NormalSource;
use crate::scalar::Scalar;
use crate::state::{from_zero_frame, rotation, Covariance4, StateVector};

pub use kernels::{conditional_moments, predicted_range, Moments};
pub use resample::{cholesky_with_jitter, resample_particles, ResampleReport};
pub use seed::seed;
pub use snapshot::{ConfidenceEllipse, Snapshot, SnapshotParticle};

/// One initial-state hypothesis with its weight and cached heading trig.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub p0: [f64; 3],
    pub theta0: f64,
    pub cos_theta0: f64,
    pub sin_theta0: f64,
    pub weight: f64,
}

impl Particle {
    /// Builds a particle from already-evaluated heading trig.
    pub fn with_trig(p0: [f64; 3], theta0: f64, cos_theta0: f64, sin_theta0: f64, weight: f64) -> Self {
        Particle { p0, theta0, cos_theta0, sin_theta0, weight }
    }

    /// Evaluates cos/sin of `theta0`. Callers account for the two trig calls.
    pub fn new(p0: [f64; 3], theta0: f64, weight: f64) -> Self {
        let (s, c) = theta0.sin_cos();
        Particle { p0, theta0, cos_theta0: c, sin_theta0: s, weight }
    }

    pub fn state(&self) -> StateVector {
        StateVector { x: self.p0[0], y: self.p0[1], z: self.p0[2], theta: self.theta0 }
    }
}

/// A range reading `r̃_ℓ` to a counterpart (initialized agent or anchor) at
/// `ref_position`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeMeasurement {
    pub value: f64,
    pub ref_position: [f64; 3],
}

impl RangeMeasurement {
    pub fn new(value: f64, ref_position: [f64; 3]) -> Result<Self, InitError> {
        if !value.is_finite() || value < 0.0 {
            return Err(InitError::InvalidInput(format!("range must be finite and non-negative, got {value}")));
        }
        if !ref_position.iter().all(|v| v.is_finite()) {
            return Err(InitError::InvalidInput("reference position must be finite".into()));
        }
        Ok(RangeMeasurement { value, ref_position })
    }
}

/// Resampling and termination parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitializerConfig {
    /// Particles with weight below `gamma / N` are redrawn.
    pub gamma: f64,
    /// Forgetting factor; the proposal covariance is `alpha² P₀`.
    pub alpha: f64,
    /// Variance bounds on `diag(P₀)`: m², m², m², rad².
    pub gamma_cov: [f64; 4],
}

impl Default for InitializerConfig {
    fn default() -> Self {
        InitializerConfig { gamma: 0.1, alpha: 1.2, gamma_cov: [1.0, 1.0, 1.0, 10f64.to_radians().powi(2)] }
    }
}

impl InitializerConfig {
    pub fn validate(&self) -> Result<(), InitError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(InitError::InvalidConfig(format!("gamma must be in (0, 1), got {}", self.gamma)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(InitError::InvalidConfig(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        if !self.gamma_cov.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(InitError::InvalidConfig(format!(
                "gamma_cov entries must be positive, got {:?}",
                self.gamma_cov
            )));
        }
        Ok(())
    }
}

/// Result of conditioning on one range measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpdateOutcome {
    Applied,
    /// `Σ w·𝒱` underflowed; prior weights and moments were kept.
    Discarded {
        likelihood_mass: f64,
    },
}

/// Everything `process_measurement` produced for one ranging event.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub update: UpdateOutcome,
    pub snapshot: Snapshot,
    pub resample: ResampleReport,
    pub terminated: bool,
}

/// Degenerate-weight threshold on `Σ w·𝒱`.
pub const UNDERFLOW_MASS: f64 = 1e-300;

/// Filter state for one joining agent.
#[derive(Clone, Debug, PartialEq)]
pub struct InitializerState {
    particles: Vec<Particle>,
    zero_track: DeadReckoningTrack,
    x0_hat: StateVector,
    p0_hat: Covariance4,
    terminated: bool,
    degenerate_heading: bool,
    /// Ranging events consumed; 0 after seeding.
    ell: usize,
    /// Particle-heading cos/sin evaluations.
    trig_evals: u64,
}

impl InitializerState {
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn particle_count(&self) -> usize {
        self.particles.len()
    }

    pub fn zero_track(&self) -> &DeadReckoningTrack {
        &self.zero_track
    }

    /// `x̂₀|ℓ`.
    pub fn x0_hat(&self) -> StateVector {
        self.x0_hat
    }

    /// `P₀|ℓ`.
    pub fn p0_hat(&self) -> Covariance4 {
        self.p0_hat
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Set when the last vector-sum heading had exactly zero length.
    pub fn degenerate_heading(&self) -> bool {
        self.degenerate_heading
    }

    pub fn ranging_index(&self) -> usize {
        self.ell
    }

    pub fn trig_evals(&self) -> u64 {
        self.trig_evals
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// Clears the termination flag so conditioning can continue, for callers
    /// that have no covariance-based filter to hand over to.
    pub fn resume(&mut self) {
        self.terminated = false;
    }

    /// Dead reckoning since the previous event; only the zero-frame track moves.
    pub fn apply_increment(&mut self, u: &DeadReckoningIncrement) {
        self.zero_track = self.zero_track.propagate(u);
    }

    /// Reweights every particle by `𝒱(r̃ | r̂)` and recomputes the conditional
    /// moments. No trigonometry is evaluated per particle.
    pub fn ranging_update<L: LikelihoodModel>(
        &mut self,
        meas: &RangeMeasurement,
        likelihood: &L,
    ) -> Result<UpdateOutcome, InitError> {
        if self.terminated {
            return Err(InitError::Terminated);
        }
        let (outcome, moments) = self.ranging_update_with::<f64, L>(meas, likelihood);
        if let Some(m) = moments {
            self.set_moments(m);
        }
        Ok(outcome)
    }

    /// Same update, run with an arbitrary scalar type; used by the
    /// operation-counting harness.
    pub fn ranging_update_with<S: Scalar, L: LikelihoodModel>(
        &mut self,
        meas: &RangeMeasurement,
        likelihood: &L,
    ) -> (UpdateOutcome, Option<Moments>) {
        let zero = self.zero_track.mean;
        let mass = kernels::reweight::<S, L>(&mut self.particles, &zero, meas, likelihood);
        if mass.is_nan() || mass < UNDERFLOW_MASS {
            return (UpdateOutcome::Discarded { likelihood_mass: mass }, None);
        }
        let m = kernels::moments::<S>(&self.particles);
        (UpdateOutcome::Applied, Some(m))
    }

    fn set_moments(&mut self, m: Moments) {
        self.x0_hat = m.mean;
        self.p0_hat = m.cov;
        self.degenerate_heading = m.degenerate_heading;
    }

    /// Current pose estimate `x̂_ℓ|ℓ = T⁻¹(x̂⁰_ℓ, x̂₀|ℓ)` and its covariance,
    /// treating the whole zero-frame dead reckoning as one step from the
    /// initial-state estimate.
    pub fn current_estimate(&self) -> (StateVector, Covariance4) {
        current_estimate(&self.zero_track, &self.x0_hat, &self.p0_hat)
    }

    /// Replaces every particle with weight below `gamma / N` by a draw from
    /// `𝒩(x̂₀|ℓ, alpha² P₀|ℓ)` with weight `1/N`, then renormalizes.
    pub fn resample<N: NormalSource + ?Sized>(
        &mut self,
        normals: &mut N,
        config: &InitializerConfig,
    ) -> Result<ResampleReport, InitError> {
        let report = resample::resample_particles(&mut self.particles, &self.x0_hat, &self.p0_hat, config, normals)?;
        self.trig_evals += 2 * report.resampled as u64;
        Ok(report)
    }

    /// Update, moments, current estimate, resampling and termination check
    /// for one ranging event.
    pub fn process_measurement<L: LikelihoodModel, N: NormalSource + ?Sized>(
        &mut self,
        meas: &RangeMeasurement,
        likelihood: &L,
        config: &InitializerConfig,
        normals: &mut N,
    ) -> Result<MeasurementOutcome, InitError> {
        if self.terminated {
            return Err(InitError::Terminated);
        }
        config.validate()?;
        let update = self.ranging_update(meas, likelihood)?;
        self.ell += 1;
        let snapshot = self.snapshot();
        let resample = match update {
            UpdateOutcome::Applied => self.resample(normals, config)?,
            UpdateOutcome::Discarded { .. } => ResampleReport::default(),
        };
        self.terminated = check_termination(&self.p0_hat, &config.gamma_cov);
        Ok(MeasurementOutcome { update, snapshot, resample, terminated: self.terminated })
    }

    /// Export record for the current ranging event: moments, current estimate
    /// and the particles whose weight exceeds `1/N`.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot::capture(self)
    }
}

/// `x̂ = T⁻¹(x̂⁰, x̂₀)`, `P = F(θ̂₀, x̂⁰, ŷ⁰) P₀ Fᵀ + R(θ̂₀) P⁰ Rᵀ(θ̂₀)`.
pub fn current_estimate(
    zero_track: &DeadReckoningTrack,
    x0_hat: &StateVector,
    p0_hat: &Covariance4,
) -> (StateVector, Covariance4) {
    let zero = zero_track.mean;
    let x = from_zero_frame(&zero, x0_hat);
    let f = system_matrix(x0_hat.theta, zero.x, zero.y);
    let r = rotation(x0_hat.theta);
    let p = f * p0_hat.matrix() * f.transpose() + r * zero_track.cov.matrix() * r.transpose();
    (x, Covariance4::from_matrix(p))
}

/// `diag(P₀) < gamma_cov`, componentwise and strict.
pub fn check_termination(p0_hat: &Covariance4, gamma_cov: &[f64; 4]) -> bool {
    p0_hat.diagonal().iter().zip(gamma_cov).all(|(v, bound)| v < bound)
}

#[cfg(test)]
mod tests;
