//! Mean and covariance propagation from dead-reckoning increments.
//!
//! The same recursion serves the navigation-frame track `(x̂_k, P_k)` and the
//! zero-frame track `(x̂⁰_k, P⁰_k)`; the latter simply starts at the origin
//! with zero covariance.

use nalgebra::Matrix4;

use crate::error::InitError;
use crate::state::{rotate_cs, wrap_angle, Covariance4, StateVector};

/// Agent-frame displacement and heading change, with its error covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeadReckoningIncrement {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub dtheta: f64,
    pub q: Covariance4,
}

impl DeadReckoningIncrement {
    pub fn new(d: [f64; 4], q: Covariance4) -> Result<Self, InitError> {
        if !d.iter().all(|v| v.is_finite()) {
            return Err(InitError::InvalidInput("non-finite dead-reckoning increment".into()));
        }
        if !q.is_finite() || !q.is_symmetric() || !q.is_psd() {
            return Err(InitError::InvalidInput("increment covariance must be finite, symmetric and PSD".into()));
        }
        Ok(DeadReckoningIncrement { dx: d[0], dy: d[1], dz: d[2], dtheta: d[3], q })
    }

    /// Noise-free increment.
    pub fn exact(d: [f64; 4]) -> Self {
        DeadReckoningIncrement { dx: d[0], dy: d[1], dz: d[2], dtheta: d[3], q: Covariance4::zeros() }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.dx, self.dy, self.dz, self.dtheta]
    }
}

/// `F(θ, dx, dy)`: identity with the heading column coupling heading error
/// into the horizontal position.
pub fn system_matrix(theta: f64, dx: f64, dy: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    let mut f = Matrix4::identity();
    f[(0, 3)] = -s * dx - c * dy;
    f[(1, 3)] = c * dx - s * dy;
    f
}

/// A propagated mean/covariance pair.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DeadReckoningTrack {
    pub mean: StateVector,
    pub cov: Covariance4,
    pub step_count: u64,
}

impl DeadReckoningTrack {
    pub fn new(mean: StateVector, cov: Covariance4) -> Self {
        DeadReckoningTrack { mean, cov, step_count: 0 }
    }

    /// Fresh zero-frame track: origin, zero heading, zero covariance.
    pub fn zero() -> Self {
        DeadReckoningTrack::default()
    }

    /// One step of `x̂_k = x̂_{k−1} + R(θ̂_{k−1})u_k`,
    /// `P_k = F P_{k−1} Fᵀ + R Q_k Rᵀ`.
    pub fn propagate(&self, u: &DeadReckoningIncrement) -> DeadReckoningTrack {
        let theta = self.mean.theta;
        let (s, c) = theta.sin_cos();
        let step = rotate_cs(c, s, u.as_array());
        let mean = StateVector {
            x: self.mean.x + step[0],
            y: self.mean.y + step[1],
            z: self.mean.z + step[2],
            theta: wrap_angle(self.mean.theta + step[3]),
        };
        let f = system_matrix(theta, u.dx, u.dy);
        let r = crate::state::rotation_from_cos_sin(c, s);
        let p = f * self.cov.matrix() * f.transpose() + r * u.q.matrix() * r.transpose();
        DeadReckoningTrack { mean, cov: Covariance4::from_matrix(p), step_count: self.step_count + 1 }
    }
}

/// Navigation-frame propagation.
pub fn propagate(track: &DeadReckoningTrack, u: &DeadReckoningIncrement) -> DeadReckoningTrack {
    track.propagate(u)
}

/// Zero-frame propagation; same recursion, applied to a track that started at
/// [`DeadReckoningTrack::zero`].
pub fn propagate_zero_frame(track0: &DeadReckoningTrack, u: &DeadReckoningIncrement) -> DeadReckoningTrack {
    track0.propagate(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn system_matrix_without_displacement_is_identity() {
        assert_eq!(system_matrix(0.8, 0.0, 0.0), Matrix4::identity());
    }

    #[test]
    fn system_matrix_at_zero_heading() {
        let (dx, dy) = (1.5, -0.25);
        let f = system_matrix(0.0, dx, dy);
        let mut want = Matrix4::identity();
        want[(0, 3)] = -dy;
        want[(1, 3)] = dx;
        assert_eq!(f, want);
    }

    #[test]
    fn system_matrix_unit_determinant() {
        for (t, dx, dy) in [(0.3, 1.0, 2.0), (-2.9, -4.0, 0.5), (1.7, 0.0, 9.0)] {
            assert!((system_matrix(t, dx, dy).determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_steps_from_origin() {
        let t = DeadReckoningTrack::zero();
        let t = t.propagate(&DeadReckoningIncrement::exact([1.0, 0.0, 0.0, FRAC_PI_2]));
        assert_eq!(t.mean.to_array(), [1.0, 0.0, 0.0, FRAC_PI_2]);
        assert_eq!(t.cov, Covariance4::zeros());
        assert_eq!(t.step_count, 1);
        let t = t.propagate(&DeadReckoningIncrement::exact([1.0, 0.0, 0.0, 0.0]));
        let want = [1.0, 1.0, 0.0, FRAC_PI_2];
        for (g, w) in t.mean.to_array().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert_eq!(t.step_count, 2);
    }

    #[test]
    fn pure_noise_injection() {
        let u = DeadReckoningIncrement::new([0.0; 4], Covariance4::identity()).unwrap();
        let t = DeadReckoningTrack::zero().propagate(&u);
        assert_eq!(t.cov, Covariance4::identity());
    }

    #[test]
    fn zero_frame_starts_at_origin() {
        let t = propagate_zero_frame(&DeadReckoningTrack::zero(), &DeadReckoningIncrement::exact([1.0, 0.0, 0.0, 0.0]));
        assert_eq!(t.mean.to_array(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_step_accumulation_without_rotation() {
        let q = 0.01;
        let u = DeadReckoningIncrement::new([0.0; 4], Covariance4::from_diagonal([q, q, q, q])).unwrap();
        let t = DeadReckoningTrack::zero().propagate(&u).propagate(&u);
        let d = t.cov.diagonal();
        for v in &d[..3] {
            assert!((v - 2.0 * q).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_increment() {
        assert!(DeadReckoningIncrement::new([f64::NAN, 0.0, 0.0, 0.0], Covariance4::zeros()).is_err());
        assert!(DeadReckoningIncrement::new([0.0; 4], Covariance4::from_diagonal([-1.0, 0.0, 0.0, 0.0])).is_err());
    }
}
