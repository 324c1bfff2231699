//! Per-particle kernels of the ranging update, generic over [`Scalar`].

use nalgebra::Matrix4;

use super::{Particle, RangeMeasurement};
use crate::likelihood::LikelihoodModel;
use crate::scalar::Scalar;
use crate::state::{wrap_angle, wrap_diff_generic, Covariance4, StateVector};

/// Weighted sample mean (vector-sum heading) and wrapped-deviation covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: StateVector,
    pub cov: Covariance4,
    /// The weighted heading vector sum had exactly zero length; the mean
    /// heading was set to 0.
    pub degenerate_heading: bool,
}

/// `‖H(θ₀)·x̂⁰ + p₀ − p_ref‖` using the particle's cached cos/sin.
pub fn predicted_range(particle: &Particle, zero_state: &StateVector, ref_position: &[f64; 3]) -> f64 {
    let dz = zero_state.z - ref_position[2];
    predicted_range_kernel::<f64>(particle, zero_state.x, zero_state.y, dz, ref_position)
}

#[inline(always)]
fn predicted_range_kernel<S: Scalar>(p: &Particle, zx: f64, zy: f64, dz: f64, r: &[f64; 3]) -> S {
    let c = S::from_f64(p.cos_theta0);
    let s = S::from_f64(p.sin_theta0);
    let (zx, zy) = (S::from_f64(zx), S::from_f64(zy));
    let hx = c * zx - s * zy + S::from_f64(p.p0[0]) - S::from_f64(r[0]);
    let hy = s * zx + c * zy + S::from_f64(p.p0[1]) - S::from_f64(r[1]);
    let hz = S::from_f64(p.p0[2]) + S::from_f64(dz);
    (hx * hx + hy * hy + hz * hz).sqrt()
}

/// Multiplies every weight by the measurement likelihood and renormalizes.
/// Returns `Σ w·𝒱` before normalization; when that mass is below
/// [`super::UNDERFLOW_MASS`] (or not finite) the weights are left untouched.
pub(super) fn reweight<S: Scalar, L: LikelihoodModel>(
    particles: &mut [Particle],
    zero: &StateVector,
    meas: &RangeMeasurement,
    likelihood: &L,
) -> f64 {
    let observed = S::from_f64(meas.value);
    let dz = zero.z - meas.ref_position[2];
    let mut posterior = Vec::with_capacity(particles.len());
    let mut mass = S::from_f64(0.0);
    for p in particles.iter() {
        let predicted = predicted_range_kernel::<S>(p, zero.x, zero.y, dz, &meas.ref_position);
        let w = S::from_f64(p.weight) * likelihood.evaluate(observed, predicted);
        mass += w;
        posterior.push(w);
    }
    let total = mass.to_f64();
    if total.is_nan() || total < super::UNDERFLOW_MASS || !total.is_finite() {
        return total;
    }
    let inv = S::from_f64(1.0).div(mass);
    for (p, w) in particles.iter_mut().zip(posterior) {
        p.weight = (w * inv).to_f64();
    }
    total
}

/// Weighted mean and covariance in two passes: sums first, then deviations
/// from the mean with the heading deviation wrapped.
#[allow(clippy::needless_range_loop)]
pub(super) fn moments<S: Scalar>(particles: &[Particle]) -> Moments {
    let zero = S::from_f64(0.0);
    let (mut sx, mut sy, mut sz, mut ss, mut sc) = (zero, zero, zero, zero, zero);
    for p in particles {
        let w = S::from_f64(p.weight);
        sx += w * S::from_f64(p.p0[0]);
        sy += w * S::from_f64(p.p0[1]);
        sz += w * S::from_f64(p.p0[2]);
        ss += w * S::from_f64(p.sin_theta0);
        sc += w * S::from_f64(p.cos_theta0);
    }
    let degenerate_heading = ss.to_f64() == 0.0 && sc.to_f64() == 0.0;
    let heading = if degenerate_heading { zero } else { ss.atan2(sc) };

    let mut acc = [zero; 10];
    for p in particles {
        let w = S::from_f64(p.weight);
        let e = [
            sx - S::from_f64(p.p0[0]),
            sy - S::from_f64(p.p0[1]),
            sz - S::from_f64(p.p0[2]),
            wrap_diff_generic(heading, S::from_f64(p.theta0)),
        ];
        let we = [w * e[0], w * e[1], w * e[2], w * e[3]];
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                acc[k] += we[i] * e[j];
                k += 1;
            }
        }
    }

    let mut m = Matrix4::zeros();
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            let v = acc[k].to_f64();
            m[(i, j)] = v;
            m[(j, i)] = v;
            k += 1;
        }
    }
    Moments {
        mean: StateVector { x: sx.to_f64(), y: sy.to_f64(), z: sz.to_f64(), theta: wrap_angle(heading.to_f64()) },
        cov: Covariance4::from_matrix(m),
        degenerate_heading,
    }
}

/// Conditional moments of a particle set whose weights sum to one.
pub fn conditional_moments(particles: &[Particle]) -> Moments {
    moments::<f64>(particles)
}
