//! Pose algebra: 4-DOF state vectors, planar rotation, heading wrapping and
//! the transforms between the navigation frame and the zero frame (the frame
//! in which the agent started at the origin with zero heading).

use std::f64::consts::PI;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Angle difference `a - b` wrapped to `(-π, π]`, computed as
/// `mod(a - b + π, 2π) - π` with a modulus carrying the divisor's sign.
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    wrap_diff_generic(a, b)
}

/// Heading wrapped to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    wrap_diff(a, 0.0)
}

#[inline(always)]
pub(crate) fn wrap_diff_generic<S: Scalar>(a: S, b: S) -> S {
    let pi = S::from_f64(PI);
    let d = (a - b + pi).rem_tau() - pi;
    // The modulus lands on [0, 2π), so the only value outside (-π, π] is -π.
    if d.to_f64() <= -PI {
        pi
    } else {
        d
    }
}

/// Agent pose: position in meters and heading in the horizontal plane in
/// radians. The heading is kept in `(-π, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta: f64,
}

impl StateVector {
    pub const ZERO: StateVector = StateVector { x: 0.0, y: 0.0, z: 0.0, theta: 0.0 };

    pub fn new(x: f64, y: f64, z: f64, theta: f64) -> Self {
        StateVector { x, y, z, theta: wrap_angle(theta) }
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.x, self.y, self.z, self.theta)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.theta]
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Euclidean distance between the position parts.
    pub fn position_distance(&self, other: &StateVector) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// `R(θ)`: planar rotation in the (x, y) block, identity on z and heading.
pub fn rotation(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    rotation_from_cos_sin(c, s)
}

pub fn rotation_from_cos_sin(c: f64, s: f64) -> Matrix4<f64> {
    #[rustfmt::skip]
    let r = Matrix4::new(
        c,  -s,  0.0, 0.0,
        s,   c,  0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    r
}

/// Rotates only the position of `v` by the heading whose cosine and sine are
/// given; the heading component passes through unchanged.
pub(crate) fn rotate_cs(c: f64, s: f64, v: [f64; 4]) -> [f64; 4] {
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2], v[3]]
}

/// `T(x, x0) = Rᵀ(θ₀)(x − x0)`, heading re-wrapped.
pub fn to_zero_frame(x: &StateVector, x0: &StateVector) -> StateVector {
    let (s, c) = x0.theta.sin_cos();
    let d = [x.x - x0.x, x.y - x0.y, x.z - x0.z, 0.0];
    let r = rotate_cs(c, -s, d);
    StateVector { x: r[0], y: r[1], z: r[2], theta: wrap_diff(x.theta, x0.theta) }
}

/// `T⁻¹(x⁰, x0) = R(θ₀)x⁰ + x0`, heading re-wrapped.
pub fn from_zero_frame(x_zero: &StateVector, x0: &StateVector) -> StateVector {
    let (s, c) = x0.theta.sin_cos();
    let r = rotate_cs(c, s, x_zero.to_array());
    StateVector { x: r[0] + x0.x, y: r[1] + x0.y, z: r[2] + x0.z, theta: wrap_angle(x_zero.theta + x0.theta) }
}

/// Symmetric positive-semidefinite 4×4 covariance over `[x, y, z, θ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covariance4(Matrix4<f64>);

impl Default for Covariance4 {
    fn default() -> Self {
        Covariance4::zeros()
    }
}

impl Covariance4 {
    pub fn zeros() -> Self {
        Covariance4(Matrix4::zeros())
    }

    pub fn identity() -> Self {
        Covariance4(Matrix4::identity())
    }

    pub fn from_diagonal(d: [f64; 4]) -> Self {
        Covariance4(Matrix4::from_diagonal(&Vector4::from(d)))
    }

    /// Wraps `m` after symmetrizing it.
    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        Covariance4((m + m.transpose()) * 0.5)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [self.0[(0, 0)], self.0[(1, 1)], self.0[(2, 2)], self.0[(3, 3)]]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[(i, j)];
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = SymmetricEigen::new(self.0).eigenvalues;
        let mut v = [e[0], e[1], e[2], e[3]];
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Minimum eigenvalue no lower than `-1e-10 · trace`.
    pub fn is_psd(&self) -> bool {
        let tol = 1e-10 * self.trace().abs().max(f64::MIN_POSITIVE);
        self.min_eigenvalue() >= -tol
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = self.0.amax().max(f64::MIN_POSITIVE);
        (self.0 - self.0.transpose()).amax() <= 1e-12 * scale
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// `R(θ₀)·P·Rᵀ(θ₀)`.
pub fn transform_covariance(p: &Covariance4, theta0: f64) -> Covariance4 {
    let r = rotation(theta0);
    Covariance4::from_matrix(r * p.matrix() * r.transpose())
}
