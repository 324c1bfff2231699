//! Bootstrap particle filter over the current pose `x_k`.
//!
//! Every particle is moved through the dead-reckoning model at every step,
//! which costs one cos/sin pair per particle per step. It serves as a
//! reference posterior for the initial-state filter.

use std::f64::consts::PI;

use nalgebra::Vector4;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rbinit_core::filter::cholesky_with_jitter;
use rbinit_core::hypotheses::BaseHypotheses;
use rbinit_core::likelihood::{CauchyLikelihood, LikelihoodModel};
use rbinit_core::state::{wrap_angle, Covariance4, StateVector};
use serde::Serialize;

use crate::realization::{run_realization, FilterSettings};
use crate::scenario::Scenario;
use crate::synth::{cauchy_sample, synthesize, LogEvent};
use crate::{realization_seed, rng_for, SimError, Stream};

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutput {
    /// Weighted-mean pose after each ranging event.
    pub estimates: Vec<StateVector>,
    /// cos/sin evaluations on particle headings and bearings.
    pub trig_evals: u64,
    pub resample_count: usize,
}

#[derive(Clone, Copy, Debug)]
struct Pose {
    x: [f64; 4],
    w: f64,
}

/// Runs the bootstrap filter with `n` particles. The first range seeds the
/// particles around the counterpart: range drawn from the range likelihood,
/// height from the hypotheses in `base`, bearing and heading uniformly. Systematic resampling runs when the effective sample
/// size drops below `n / 2`.
pub fn oracle_filter(
    events: &[LogEvent],
    base: &BaseHypotheses,
    likelihood_scale: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<OracleOutput, SimError> {
    if n == 0 {
        return Err(SimError::Config("oracle particle count must be positive".into()));
    }
    base.validate()?;
    let lik = CauchyLikelihood::new(likelihood_scale)?;
    let mut particles: Vec<Pose> = Vec::new();
    let mut out = OracleOutput { estimates: Vec::new(), trig_evals: 0, resample_count: 0 };
    // Height gained before the first range; the horizontal part is absorbed
    // by the uniform bearing and heading.
    let mut climb = 0.0;

    for ev in events {
        match ev {
            LogEvent::DeadReckoning(d) => {
                if particles.is_empty() {
                    climb += d.dr[2];
                    continue;
                }
                let q = Covariance4::from_diagonal(d.q_diag);
                let (chol, _) = cholesky_with_jitter(&q)?;
                let noisy = d.q_diag.iter().any(|v| *v > 0.0);
                for p in &mut particles {
                    let mut u = d.dr;
                    if noisy {
                        let w = chol * Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                        for (ui, wi) in u.iter_mut().zip(w.iter()) {
                            *ui += wi;
                        }
                    }
                    let (s, c) = p.x[3].sin_cos();
                    p.x[0] += c * u[0] - s * u[1];
                    p.x[1] += s * u[0] + c * u[1];
                    p.x[2] += u[2];
                    p.x[3] = wrap_angle(p.x[3] + u[3]);
                }
                out.trig_evals += 2 * particles.len() as u64;
            }
            LogEvent::Range(r) => {
                if particles.is_empty() {
                    particles = seed_particles(r.range, &r.ref_position, climb, base, likelihood_scale, n, rng);
                    out.trig_evals += 4 * n as u64;
                } else {
                    let mut total = 0.0;
                    for p in &mut particles {
                        let d = ((p.x[0] - r.ref_position[0]).powi(2)
                            + (p.x[1] - r.ref_position[1]).powi(2)
                            + (p.x[2] - r.ref_position[2]).powi(2))
                        .sqrt();
                        p.w *= lik.evaluate(r.range, d);
                        total += p.w;
                    }
                    if total > 0.0 && total.is_finite() {
                        particles.iter_mut().for_each(|p| p.w /= total);
                    } else {
                        particles.iter_mut().for_each(|p| p.w = 1.0 / n as f64);
                    }
                }
                out.estimates.push(weighted_mean(&particles));
                let ess = 1.0 / particles.iter().map(|p| p.w * p.w).sum::<f64>();
                if ess < n as f64 / 2.0 {
                    particles = systematic_resample(&particles, rng);
                    out.resample_count += 1;
                }
            }
        }
    }
    Ok(out)
}

fn seed_particles(
    observed: f64,
    ref_position: &[f64; 3],
    climb: f64,
    base: &BaseHypotheses,
    scale: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Pose> {
    let mut particles: Vec<Pose> = (0..n)
        .map(|_| {
            let h = pick(&base.heights, rng);
            // Range drawn from the first-range likelihood; the weight `r`
            // turns it into the posterior under a flat prior on the plane.
            let r = loop {
                let r = observed + cauchy_sample(rng, scale);
                if r > 0.0 {
                    break r;
                }
            };
            let dz = ref_position[2] - climb - h;
            let horizontal = (r * r - dz * dz).abs().sqrt();
            let chi = rng.random_range(-PI..PI);
            let (s, c) = chi.sin_cos();
            let theta = wrap_angle(rng.random_range(-PI..PI));
            Pose {
                x: [ref_position[0] - horizontal * c, ref_position[1] - horizontal * s, ref_position[2] - dz, theta],
                w: r,
            }
        })
        .collect();
    let total: f64 = particles.iter().map(|p| p.w).sum();
    particles.iter_mut().for_each(|p| p.w /= total);
    particles
}

/// Draws a value with probability proportional to its weight.
fn pick(options: &[(f64, f64)], rng: &mut ChaCha8Rng) -> f64 {
    let total: f64 = options.iter().map(|o| o.1).sum();
    let mut u = rng.random::<f64>() * total;
    for &(v, w) in options {
        if u < w {
            return v;
        }
        u -= w;
    }
    options.last().expect("non-empty hypotheses").0
}

fn weighted_mean(particles: &[Pose]) -> StateVector {
    let (mut m, mut s, mut c) = ([0.0; 3], 0.0, 0.0);
    for p in particles {
        for (mi, xi) in m.iter_mut().zip(&p.x[..3]) {
            *mi += p.w * xi;
        }
        // Heading trig is recomputed here; not counted, since the estimate is
        // a reporting step rather than part of the recursion.
        let (si, ci) = p.x[3].sin_cos();
        s += p.w * si;
        c += p.w * ci;
    }
    StateVector { x: m[0], y: m[1], z: m[2], theta: if s == 0.0 && c == 0.0 { 0.0 } else { s.atan2(c) } }
}

fn systematic_resample(particles: &[Pose], rng: &mut ChaCha8Rng) -> Vec<Pose> {
    let n = particles.len();
    let step = 1.0 / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cum = particles[0].w;
    let mut i = 0;
    for _ in 0..n {
        while u > cum && i + 1 < n {
            i += 1;
            cum += particles[i].w;
        }
        out.push(Pose { x: particles[i].x, w: step });
        u += step;
    }
    out
}


/// Final-ranging RMSE of both filters on shared synthesized streams.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub realizations: usize,
    pub init_particles: usize,
    pub oracle_particles: usize,
    pub rmse_init_m: f64,
    pub rmse_oracle_m: f64,
    pub rmse_difference_m: f64,
    /// Mean heading cos/sin evaluations per realization.
    pub trig_init: f64,
    pub trig_oracle: f64,
    pub trig_ratio: f64,
}

/// Runs both filters on `n_realizations` streams of `scenario`.
pub fn compare_with_oracle(
    scenario: &Scenario,
    settings: &FilterSettings,
    oracle_particles: usize,
    n_realizations: usize,
    master_seed: u64,
) -> Result<Comparison, SimError> {
    if n_realizations == 0 {
        return Err(SimError::Config("at least one realization is required".into()));
    }
    settings.validate()?;
    // (initializer error, oracle error, initializer trig, oracle trig, particles)
    type Run = (f64, f64, u64, u64, usize);
    let runs: Vec<Run> = (0..n_realizations)
        .into_par_iter()
        .map(|i| {
            let seed = realization_seed(master_seed, i);
            let init = run_realization(scenario, settings, seed, false)?;
            let synth = synthesize(scenario, seed)?;
            let mut rng = rng_for(seed, Stream::Oracle);
            let o =
                oracle_filter(&synth.events, &settings.base, settings.likelihood_scale, oracle_particles, &mut rng)?;
            let truth = synth.rangings.last().expect("scenario has rangings").agent;
            let oracle_err = o.estimates.last().expect("oracle saw the rangings").position_distance(&truth);
            Ok((init.final_error(), oracle_err, init.run.trig_evals, o.trig_evals, init.run.particle_count))
        })
        .collect::<Result<_, SimError>>()?;
    let n = n_realizations as f64;
    let rms = |f: &dyn Fn(&Run) -> f64| (runs.iter().map(|r| f(r).powi(2)).sum::<f64>() / n).sqrt();
    let rmse_init_m = rms(&|r| r.0);
    let rmse_oracle_m = rms(&|r| r.1);
    let trig_init = runs.iter().map(|r| r.2 as f64).sum::<f64>() / n;
    let trig_oracle = runs.iter().map(|r| r.3 as f64).sum::<f64>() / n;
    Ok(Comparison {
        realizations: n_realizations,
        init_particles: runs[0].4,
        oracle_particles,
        rmse_init_m,
        rmse_oracle_m,
        rmse_difference_m: (rmse_init_m - rmse_oracle_m).abs(),
        trig_init,
        trig_oracle,
        trig_ratio: trig_oracle / trig_init,
    })
}
