use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hypotheses::BaseHypotheses;
use crate::likelihood::CauchyLikelihood;
use crate::normal::{NormalTable, RngNormals};
use crate::scalar::{count_ops, Tally};
use crate::state::{to_zero_frame, wrap_diff};

/// Returns `near` when the prediction is below `split`, `far` otherwise.
struct StepLikelihood {
    split: f64,
    near: f64,
    far: f64,
}

impl LikelihoodModel for StepLikelihood {
    fn evaluate<S: Scalar>(&self, _observed: S, predicted: S) -> S {
        if predicted.to_f64() < self.split {
            S::from_f64(self.near)
        } else {
            S::from_f64(self.far)
        }
    }
}

fn state_from(particles: Vec<Particle>) -> InitializerState {
    let m = conditional_moments(&particles);
    InitializerState {
        particles,
        zero_track: DeadReckoningTrack::zero(),
        x0_hat: m.mean,
        p0_hat: m.cov,
        terminated: false,
        degenerate_heading: m.degenerate_heading,
        ell: 0,
        trig_evals: 0,
    }
}

fn at(x: f64, theta: f64, w: f64) -> Particle {
    Particle::new([x, 0.0, 0.0], theta, w)
}

#[test]
fn reweight_normalizes_likelihood_products() {
    let mut s = state_from(vec![at(1.0, 0.0, 0.5), at(10.0, 0.0, 0.5)]);
    let lik = StepLikelihood { split: 5.0, near: 0.3, far: 0.1 };
    let meas = RangeMeasurement::new(1.0, [0.0; 3]).unwrap();
    assert_eq!(s.ranging_update(&meas, &lik).unwrap(), UpdateOutcome::Applied);
    assert!((s.particles()[0].weight - 0.75).abs() < 1e-15);
    assert!((s.particles()[1].weight - 0.25).abs() < 1e-15);
}

#[test]
fn uninformative_measurement_keeps_weights() {
    let mut s = state_from(vec![at(1.0, 0.0, 0.2), at(3.0, 0.0, 0.3), at(10.0, 0.0, 0.5)]);
    let before: Vec<f64> = s.particles().iter().map(|p| p.weight).collect();
    let lik = StepLikelihood { split: 0.0, near: 0.0, far: 0.42 };
    s.ranging_update(&RangeMeasurement::new(2.0, [0.0; 3]).unwrap(), &lik).unwrap();
    for (p, w) in s.particles().iter().zip(before) {
        assert!((p.weight - w).abs() < 1e-15);
    }
}

#[test]
fn underflow_discards_the_measurement() {
    let mut s = state_from(vec![at(1.0, 0.0, 0.4), at(3.0, 0.0, 0.6)]);
    let before = s.clone();
    let lik = StepLikelihood { split: 0.0, near: 0.0, far: 0.0 };
    let out = s.ranging_update(&RangeMeasurement::new(2.0, [0.0; 3]).unwrap(), &lik).unwrap();
    assert!(matches!(out, UpdateOutcome::Discarded { .. }));
    assert_eq!(s, before);
}

#[test]
fn predicted_range_examples() {
    let p = Particle::new([0.0; 3], 0.0, 1.0);
    assert!((predicted_range(&p, &StateVector::ZERO, &[10.0, 0.0, 0.0]) - 10.0).abs() < 1e-15);

    let p = Particle::new([0.0; 3], FRAC_PI_2, 1.0);
    let z = StateVector::new(1.0, 0.0, 0.0, 0.0);
    assert!(predicted_range(&p, &z, &[0.0, 1.0, 0.0]).abs() < 1e-15);
}

#[test]
fn predicted_range_matches_frame_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    use rand::Rng;
    for _ in 0..500 {
        let p0 = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-2.0..2.0)];
        let theta0 = rng.random_range(-PI..PI);
        let zero = StateVector::new(
            rng.random_range(-80.0..80.0),
            rng.random_range(-80.0..80.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-PI..PI),
        );
        let r = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-2.0..2.0)];
        let particle = Particle::new(p0, theta0, 1.0);
        let nav = from_zero_frame(&zero, &particle.state());
        let oracle = ((nav.x - r[0]).powi(2) + (nav.y - r[1]).powi(2) + (nav.z - r[2]).powi(2)).sqrt();
        assert!((predicted_range(&particle, &zero, &r) - oracle).abs() < 1e-9);
    }
}

#[test]
fn moments_of_a_point_mass() {
    let p = Particle::new([1.0, 2.0, 3.0], 0.4, 1.0);
    let m = conditional_moments(&[p]);
    assert_eq!(m.mean.position(), [1.0, 2.0, 3.0]);
    assert!((m.mean.theta - 0.4).abs() < 1e-15);
    assert!(m.cov.matrix().amax() < 1e-30);
}

#[test]
fn moments_wrap_heading_across_the_cut() {
    let a = at(0.0, 170f64.to_radians(), 0.5);
    let b = at(0.0, (-170f64).to_radians(), 0.5);
    let m = conditional_moments(&[a, b]);
    assert!(wrap_diff(m.mean.theta, PI).abs() < 1e-12);
    let var = m.cov.diagonal()[3];
    assert!((var - 10f64.to_radians().powi(2)).abs() < 1e-12);
    assert!((var - 0.030462).abs() < 1e-6);
}

#[test]
fn moments_position_variance() {
    let d = 2.5;
    let m = conditional_moments(&[at(d, 0.0, 0.5), at(-d, 0.0, 0.5)]);
    assert!(m.mean.x.abs() < 1e-15);
    assert!((m.cov.diagonal()[0] - d * d).abs() < 1e-12);
}

#[test]
fn symmetric_heading_is_flagged() {
    let a = Particle::with_trig([0.0; 3], 0.0, 1.0, 0.0, 0.5);
    let b = Particle::with_trig([0.0; 3], PI, -1.0, 0.0, 0.5);
    let m = conditional_moments(&[a, b]);
    assert!(m.degenerate_heading);
    assert_eq!(m.mean.theta, 0.0);
}

#[test]
fn heading_variance_of_a_uniform_grid_exceeds_a_third_pi_squared() {
    // A uniform 4-point heading grid has mean direction 0 by the atan2(0, 0)
    // convention and deviations {0, ±π/2, π}: variance 3π²/8.
    let cs = [(0.0, 1.0, 0.0), (FRAC_PI_2, 0.0, 1.0), (PI, -1.0, 0.0), (-FRAC_PI_2, 0.0, -1.0)];
    let ps: Vec<Particle> = cs.iter().map(|&(t, c, s)| Particle::with_trig([0.0; 3], t, c, s, 0.25)).collect();
    let m = conditional_moments(&ps);
    let var = m.cov.diagonal()[3];
    assert!((var - 3.0 * PI * PI / 8.0).abs() < 1e-12);
    assert!(var > PI * PI / 3.0);
    assert!(var <= PI * PI / 2.0 + 1e-9);
}

#[test]
fn current_estimate_without_motion() {
    let mut s = state_from(vec![Particle::new([1.0, 2.0, 0.0], 0.3, 0.5), Particle::new([3.0, 0.0, 0.5], 0.5, 0.5)]);
    s.zero_track.cov = Covariance4::from_diagonal([0.1, 0.2, 0.3, 0.01]);
    let (x, p) = s.current_estimate();
    assert_eq!(x.position(), s.x0_hat().position());
    let r = rotation(s.x0_hat().theta);
    let want = s.p0_hat().matrix() + r * s.zero_track.cov.matrix() * r.transpose();
    assert!((p.matrix() - want).amax() < 1e-14);
}

#[test]
fn current_estimate_with_perfect_anchor_is_the_zero_track() {
    let track = DeadReckoningTrack::zero()
        .propagate(
            &DeadReckoningIncrement::new([2.0, 0.5, 0.1, 0.3], Covariance4::from_diagonal([0.01, 0.02, 0.0, 0.001]))
                .unwrap(),
        )
        .propagate(
            &DeadReckoningIncrement::new([1.0, -0.5, 0.0, -0.1], Covariance4::from_diagonal([0.01, 0.01, 0.01, 0.001]))
                .unwrap(),
        );
    let (x, p) = current_estimate(&track, &StateVector::ZERO, &Covariance4::zeros());
    assert_eq!(x, track.mean);
    assert!((p.matrix() - track.cov.matrix()).amax() < 1e-15);
}

#[test]
fn re_anchoring_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    use rand::Rng;
    for _ in 0..200 {
        let mut v = || {
            StateVector::new(
                rng.random_range(-40.0..40.0),
                rng.random_range(-40.0..40.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-PI..PI),
            )
        };
        let (x_prev, anchor_prev, anchor) = (v(), v(), v());
        let once = from_zero_frame(&to_zero_frame(&x_prev, &anchor_prev), &anchor);
        let twice = from_zero_frame(&to_zero_frame(&once, &anchor), &anchor);
        for (a, b) in once.to_array().iter().zip(twice.to_array()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn termination_examples() {
    let bounds = [1.0, 1.0, 1.0, 0.05];
    let p = Covariance4::from_diagonal([0.5, 0.5, 0.1, 0.01]);
    assert!(check_termination(&p, &bounds));
    for i in 0..4 {
        let mut d = [0.5, 0.5, 0.1, 0.01];
        d[i] = 2.0;
        assert!(!check_termination(&Covariance4::from_diagonal(d), &bounds));
    }
    assert!(!check_termination(&Covariance4::from_diagonal([1.0, 0.5, 0.1, 0.01]), &bounds));
}

#[test]
fn resample_without_trigger_is_a_no_op() {
    let mut s = state_from((0..10).map(|i| at(i as f64, 0.1, 0.1)).collect());
    let before = s.clone();
    let mut normals = NormalTable::new(vec![1.0]);
    let report = s.resample(&mut normals, &InitializerConfig::default()).unwrap();
    assert_eq!(report.resampled, 0);
    assert_eq!(s, before);
}

#[test]
fn resampled_particle_gets_one_over_n() {
    let n = 100;
    let mut ps: Vec<Particle> = (0..n).map(|i| at(i as f64 * 0.1, 0.2, 1.0 / 99.0)).collect();
    ps[17].weight = 0.0;
    let mut s = state_from(ps);
    let cfg = InitializerConfig { gamma: 0.1, ..Default::default() };
    let mut normals = NormalTable::new(vec![0.5, -0.25, 1.0, 0.1]);
    let report = s.resample(&mut normals, &cfg).unwrap();
    assert_eq!(report.resampled, 1);
    assert_eq!(s.trig_evals(), 2);
    // Before renormalization: new weight 1/N against survivors at 1/99.
    let ratio = s.particles()[17].weight / s.particles()[0].weight;
    assert!((ratio - (1.0 / 100.0) / (1.0 / 99.0)).abs() < 1e-12);
    assert!((s.weight_sum() - 1.0).abs() < 1e-12);
    let p = s.particles()[17];
    assert!((p.cos_theta0 - p.theta0.cos()).abs() < 1e-15);
}

#[test]
fn resample_inflates_by_alpha_squared() {
    let n = 10_000;
    let mut s = state_from((0..n).map(|_| at(0.0, 0.0, 0.0)).collect());
    s.x0_hat = StateVector::new(5.0, -3.0, 0.2, 0.5);
    s.p0_hat = Covariance4::from_diagonal([1.0, 1.0, 1.0, 0.01]);
    let cfg = InitializerConfig { alpha: 2.0, ..Default::default() };
    let mut normals = RngNormals(ChaCha8Rng::seed_from_u64(5));
    let report = s.resample(&mut normals, &cfg).unwrap();
    assert_eq!(report.resampled, n);

    // Large-sample covariance of the drawn set, heading unwrapped around the mean.
    let mean = s.x0_hat().to_array();
    let mut cov = [[0.0; 4]; 4];
    for p in s.particles() {
        let e = [p.p0[0] - mean[0], p.p0[1] - mean[1], p.p0[2] - mean[2], wrap_diff(p.theta0, mean[3])];
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] += e[i] * e[j] / n as f64;
            }
        }
    }
    let want = [4.0, 4.0, 4.0, 0.04];
    for i in 0..4 {
        assert!((cov[i][i] / want[i] - 1.0).abs() < 0.1, "{i}: {}", cov[i][i]);
    }
}

#[test]
fn resample_with_unit_alpha_is_unbiased() {
    let n = 10_000;
    let mut s = state_from((0..n).map(|_| at(0.0, 0.0, 0.0)).collect());
    s.x0_hat = StateVector::new(12.0, 7.0, -0.5, -2.0);
    let sd = [2.0, 1.5, 0.3, 0.2];
    s.p0_hat = Covariance4::from_diagonal(sd.map(|v| v * v));
    let cfg = InitializerConfig { alpha: 1.0, ..Default::default() };
    s.resample(&mut RngNormals(ChaCha8Rng::seed_from_u64(9)), &cfg).unwrap();
    let m = conditional_moments(s.particles());
    let got = m.mean.to_array();
    let want = s.x0_hat().to_array();
    for i in 0..4 {
        let bound = 3.0 * sd[i] / (n as f64).sqrt();
        assert!(wrap_diff(got[i], want[i]).abs() < bound || (got[i] - want[i]).abs() < bound, "{i}");
    }
}

#[test]
fn cholesky_jitter_and_zero() {
    let (l, jit) = cholesky_with_jitter(&Covariance4::zeros()).unwrap();
    assert_eq!(l, nalgebra::Matrix4::zeros());
    assert!(!jit);
    let (l, jit) = cholesky_with_jitter(&Covariance4::from_diagonal([1.0, 1.0, 0.0, 1.0])).unwrap();
    assert!(jit);
    let back = l * l.transpose();
    assert!((back[(0, 0)] - 1.0).abs() < 1e-9);
    assert!(cholesky_with_jitter(&Covariance4::from_diagonal([1.0, -1.0, 1.0, 1.0])).is_err());
}

fn seeded(granularity_deg: f64) -> InitializerState {
    let track = DeadReckoningTrack::zero()
        .propagate(&DeadReckoningIncrement::exact([3.0, 0.0, 0.0, 0.4]))
        .propagate(&DeadReckoningIncrement::exact([2.0, 0.0, 0.1, -0.2]));
    let meas = RangeMeasurement::new(15.0, [4.0, 9.0, 1.0]).unwrap();
    let lik = CauchyLikelihood::new(1.0).unwrap();
    seed(&meas, &track, &BaseHypotheses::with_granularity_deg(granularity_deg), &lik).unwrap()
}

#[test]
fn seed_counts_and_normalization() {
    for (deg, n, nb) in [(90.0, 144, 4), (45.0, 576, 8), (11.25, 9216, 32)] {
        let s = seeded(deg);
        assert_eq!(s.particle_count(), n);
        assert!((s.weight_sum() - 1.0).abs() < 1e-12);
        assert_eq!(s.trig_evals(), 2 * (nb + nb) as u64);
        assert!(s.p0_hat().is_psd());
    }
}

#[test]
fn seeded_particles_reproduce_their_range_hypothesis() {
    let s = seeded(45.0);
    let meas_ref = [4.0, 9.0, 1.0];
    let zero = s.zero_track().mean;
    let mut counts = [0usize; 3];
    for p in s.particles() {
        let r = predicted_range(p, &zero, &meas_ref);
        let k = [14.0, 15.0, 16.0].iter().position(|h| (r - h).abs() < 1e-9);
        counts[k.expect("predicted range matches a range hypothesis")] += 1;
    }
    assert_eq!(counts, [192, 192, 192]);
}

#[test]
fn seed_weights_follow_range_likelihood() {
    let s = seeded(90.0);
    let zero = s.zero_track().mean;
    let (mut at_reading, mut off_by_one) = (0.0, 0.0);
    for p in s.particles() {
        let r = predicted_range(p, &zero, &[4.0, 9.0, 1.0]);
        if (r - 15.0).abs() < 1e-9 {
            at_reading = p.weight;
        } else {
            off_by_one = p.weight;
        }
    }
    // 𝒱(r̃₀ | r̃₀) / 𝒱(r̃₀ ± 1 | r̃₀) = 2 for σ = 1.
    assert!((at_reading / off_by_one - 2.0).abs() < 1e-12);
}

#[test]
fn seed_rejects_bad_input() {
    let lik = CauchyLikelihood::new(1.0).unwrap();
    let meas = RangeMeasurement { value: -1.0, ref_position: [0.0; 3] };
    let base = BaseHypotheses::with_granularity_deg(90.0);
    assert_eq!(seed(&meas, &DeadReckoningTrack::zero(), &base, &lik).unwrap_err(), InitError::NegativeRange(-1.0));
    let mut empty = base.clone();
    empty.range_offsets.clear();
    let ok = RangeMeasurement::new(3.0, [0.0; 3]).unwrap();
    assert!(seed(&ok, &DeadReckoningTrack::zero(), &empty, &lik).is_err());
}

#[test]
fn ranging_update_is_trig_free_and_within_budget() {
    let lik = CauchyLikelihood::new(1.0).unwrap();
    let meas = RangeMeasurement::new(13.0, [20.0, 4.0, 0.0]).unwrap();
    for deg in [45.0, 11.25] {
        let mut s = seeded(deg);
        s.apply_increment(&DeadReckoningIncrement::exact([4.0, 1.0, 0.0, 0.3]));
        let trig_before = s.trig_evals();
        let n = s.particle_count() as u64;
        let ((outcome, _), ops) = count_ops(|| s.ranging_update_with::<Tally, _>(&meas, &lik));
        assert_eq!(outcome, UpdateOutcome::Applied);
        assert_eq!(s.trig_evals(), trig_before);
        assert_eq!(ops.cos_sin, 0);
        // One atan2 for the vector-sum heading, independent of N.
        assert_eq!(ops.atan2, 1);
        assert!(ops.add <= 2 * 32 * n, "{ops:?}");
        assert!(ops.mul <= 2 * 32 * n, "{ops:?}");
        assert!(ops.div <= 2 * n, "{ops:?}");
        assert_eq!(ops.sqrt, n);
        assert_eq!(ops.modulus, n);
    }
}

#[test]
fn counted_and_plain_updates_agree_bitwise() {
    let lik = CauchyLikelihood::new(1.0).unwrap();
    let meas = RangeMeasurement::new(13.0, [20.0, 4.0, 0.0]).unwrap();
    let mut a = seeded(45.0);
    let mut b = a.clone();
    a.ranging_update(&meas, &lik).unwrap();
    let (_, m) = b.ranging_update_with::<Tally, _>(&meas, &lik);
    b.set_moments(m.unwrap());
    assert_eq!(a, b);
}

#[test]
fn process_measurement_then_terminated_guard() {
    let lik = CauchyLikelihood::new(1.0).unwrap();
    let mut s = seeded(45.0);
    let cfg = InitializerConfig { gamma_cov: [1e6, 1e6, 1e6, 1e3], ..Default::default() };
    let mut normals = RngNormals(ChaCha8Rng::seed_from_u64(1));
    let meas = RangeMeasurement::new(13.0, [20.0, 4.0, 0.0]).unwrap();
    let out = s.process_measurement(&meas, &lik, &cfg, &mut normals).unwrap();
    assert!(out.terminated);
    assert_eq!(out.snapshot.ell, 1);
    assert_eq!(s.process_measurement(&meas, &lik, &cfg, &mut normals).unwrap_err(), InitError::Terminated);
    assert_eq!(s.ranging_update(&meas, &lik).unwrap_err(), InitError::Terminated);
}

#[test]
fn snapshot_filters_by_weight_and_serializes_field_names() {
    let s = seeded(90.0);
    let snap = s.snapshot();
    let level = 1.0 / s.particle_count() as f64;
    assert!(snap.particles.iter().all(|p| p.weight > level));
    assert!(!snap.particles.is_empty());
    let v: serde_json::Value = serde_json::to_value(&snap).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["P0", "P0_diag", "ell", "particles", "x0_hat", "x_hat"]);
    let e = snap.confidence_ellipse();
    assert!(e.semi_major >= e.semi_minor);
}
