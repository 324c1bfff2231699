//! Deterministic sampling of the first-range likelihood into initial-state
//! hypotheses.

use super::kernels::moments;
use super::{InitializerState, Particle, RangeMeasurement};
use crate::dead_reckoning::DeadReckoningTrack;
use crate::error::InitError;
use crate::hypotheses::BaseHypotheses;
use crate::likelihood::LikelihoodModel;
use crate::state::wrap_angle;

/// cos/sin table over `count` angles spaced by `step`, starting at 0.
fn angle_table(count: usize, step: f64) -> Vec<(f64, f64, f64)> {
    (0..count)
        .map(|k| {
            let a = wrap_angle(k as f64 * step);
            let (s, c) = a.sin_cos();
            (a, c, s)
        })
        .collect()
}

/// Seeds the particle set from the first range measurement.
///
/// Every (height, range, bearing, heading) combination places the agent on
/// the sphere around the reference position at the time of the first range,
/// then backs out the start pose by undoing the zero-frame dead reckoning
/// rotated by the heading hypothesis. Weights are the product of the height,
/// range (`𝒱(r⁽ʲ⁾ | r̃₀)`) and heading weights, normalized.
pub fn seed<L: LikelihoodModel>(
    first_range: &RangeMeasurement,
    zero_track: &DeadReckoningTrack,
    base: &BaseHypotheses,
    likelihood: &L,
) -> Result<InitializerState, InitError> {
    base.validate()?;
    if first_range.value < 0.0 || !first_range.value.is_finite() {
        return Err(InitError::NegativeRange(first_range.value));
    }
    let bearings = angle_table(base.bearing_count()?, base.bearing_granularity);
    let headings = angle_table(base.heading_count()?, base.heading_granularity);
    let trig_evals = 2 * (bearings.len() + headings.len()) as u64;

    let observed = first_range.value;
    let ranges: Vec<(f64, f64)> = base
        .range_offsets
        .iter()
        .map(|off| {
            let r = (observed + off).max(0.0);
            (r, likelihood.evaluate(observed, r))
        })
        .collect();
    let heading_weights: Vec<f64> = match &base.heading_weights {
        Some(w) => w.clone(),
        None => vec![1.0; headings.len()],
    };

    let zero = zero_track.mean;
    let [rx, ry, rz] = first_range.ref_position;
    let n = base.heights.len() * ranges.len() * bearings.len() * headings.len();
    let mut particles = Vec::with_capacity(n);
    for &(h, w_h) in &base.heights {
        // Vertical offset between the counterpart and the agent at this range.
        let dz = rz - zero.z - h;
        for &(r, w_r) in &ranges {
            // The absolute value keeps small ranges with a large height offset real.
            let horizontal = (r * r - dz * dz).abs().sqrt();
            for &(_, c_chi, s_chi) in &bearings {
                let px = rx - horizontal * c_chi;
                let py = ry - horizontal * s_chi;
                let pz = rz - dz;
                for (&(theta, c, s), &w_t) in headings.iter().zip(&heading_weights) {
                    let p0 = [px - (c * zero.x - s * zero.y), py - (s * zero.x + c * zero.y), pz - zero.z];
                    particles.push(Particle::with_trig(p0, theta, c, s, w_h * w_r * w_t));
                }
            }
        }
    }

    let total: f64 = particles.iter().map(|p| p.weight).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(InitError::InvalidHypotheses(format!("seed weights sum to {total}")));
    }
    for p in &mut particles {
        p.weight /= total;
    }

    let m = moments::<f64>(&particles);
    Ok(InitializerState {
        particles,
        zero_track: *zero_track,
        x0_hat: m.mean,
        p0_hat: m.cov,
        terminated: false,
        degenerate_heading: m.degenerate_heading,
        ell: 0,
        trig_evals,
    })
}
