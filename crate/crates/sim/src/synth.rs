//! Ground truth, dead-reckoning increments and range readings for a scenario.

use std::f64::consts::PI;

use nalgebra::Vector4;
use rand::Rng;
use rand_distr::StandardNormal;
use rbinit_core::filter::cholesky_with_jitter;
use rbinit_core::state::{wrap_angle, wrap_diff, StateVector};
use serde::{Deserialize, Serialize};

use crate::scenario::{dist, Scenario};
use crate::{rng_for, SimError, Stream};

/// One line of a measurement log. Dead-reckoning entries carry the
/// agent-frame increment and the diagonal of its covariance (SI units,
/// radians); range entries carry the reading and the counterpart position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogEvent {
    DeadReckoning(DrRecord),
    Range(RangeRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrRecord {
    pub t: f64,
    pub dr: [f64; 4],
    #[serde(rename = "Q_diag")]
    pub q_diag: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeRecord {
    pub t: f64,
    pub range: f64,
    #[serde(rename = "ref")]
    pub ref_position: [f64; 3],
}

impl LogEvent {
    pub fn time(&self) -> f64 {
        match self {
            LogEvent::DeadReckoning(d) => d.t,
            LogEvent::Range(r) => r.t,
        }
    }
}

/// Truth at one ranging event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangingTruth {
    /// Steps since the agent joined.
    pub step: usize,
    pub agent: StateVector,
    pub ref_position: [f64; 3],
    pub true_range: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    /// Time-ordered increments and ranges.
    pub events: Vec<LogEvent>,
    /// Agent pose after every step since joining; `truth[0]` is the initial
    /// state the filter estimates.
    pub truth: Vec<StateVector>,
    pub rangings: Vec<RangingTruth>,
}

/// Agent poses at `step_length` spacing. Each waypoint is hit exactly; the
/// heading at a pose points along the next step.
pub fn truth_path(scenario: &Scenario) -> (Vec<StateVector>, Vec<usize>) {
    let wps = &scenario.agent_waypoints;
    let mut points = vec![wps[0]];
    let mut waypoint_step = vec![0];
    for w in wps.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = dist(&a, &b);
        if len > 0.0 {
            let n = ((len / scenario.step_length) - 1e-9).ceil().max(1.0) as usize;
            for i in 1..=n {
                let f = i as f64 / n as f64;
                points.push(if i == n {
                    b
                } else {
                    [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2])]
                });
            }
        }
        waypoint_step.push(points.len() - 1);
    }

    let mut headings = vec![0.0; points.len()];
    let mut last = None;
    for k in 0..points.len().saturating_sub(1) {
        let (dx, dy) = (points[k + 1][0] - points[k][0], points[k + 1][1] - points[k][1]);
        if dx.hypot(dy) > 1e-12 {
            last = Some(dy.atan2(dx));
        }
        headings[k] = last.unwrap_or(f64::NAN);
    }
    // Poses before the first horizontal move take its heading; the final pose
    // keeps the last one.
    let first = headings.iter().copied().find(|h| !h.is_nan()).unwrap_or(0.0);
    let mut prev = first;
    for h in &mut headings {
        if h.is_nan() {
            *h = prev;
        }
        prev = *h;
    }
    if let (Some(end), Some(l)) = (headings.last_mut(), last) {
        *end = l;
    }

    let truth = points
        .iter()
        .zip(&headings)
        .map(|(p, &h)| StateVector { x: p[0], y: p[1], z: p[2], theta: wrap_angle(h) })
        .collect();
    (truth, waypoint_step)
}

/// Exact agent-frame increment from pose `a` to pose `b`.
pub fn exact_increment(a: &StateVector, b: &StateVector) -> [f64; 4] {
    let (s, c) = a.theta.sin_cos();
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    [c * dx + s * dy, -s * dx + c * dy, b.z - a.z, wrap_diff(b.theta, a.theta)]
}

/// Cauchy sample by inverse CDF.
pub fn cauchy_sample<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.random();
    scale * (PI * (u - 0.5)).tan()
}

/// Ground truth plus noisy increments and range readings, deterministic in
/// `seed`. Event times count steps since the agent joined. Readings are
/// clamped at zero because a range cannot be negative; otherwise the noise is
/// unclipped.
pub fn synthesize(scenario: &Scenario, seed: u64) -> Result<Synthesis, SimError> {
    scenario.validate()?;
    let mut rng = rng_for(seed, Stream::Synthesis);
    let (path, waypoint_step) = truth_path(scenario);
    let join = waypoint_step[scenario.join_index()];
    let truth = path[join..].to_vec();
    let (chol, _) = cholesky_with_jitter(&scenario.dr_noise)?;
    let q_diag = scenario.dr_noise.diagonal();
    let noisy = q_diag.iter().any(|v| *v > 0.0);

    let mut rangings_at: Vec<Vec<usize>> = vec![Vec::new(); truth.len()];
    for (i, &(_, a)) in scenario.ranging_schedule.iter().enumerate() {
        rangings_at[waypoint_step[a] - join].push(i);
    }

    let mut events = Vec::new();
    let mut rangings = Vec::with_capacity(scenario.ranging_schedule.len());
    for k in 0..truth.len() {
        if k > 0 {
            let mut d = exact_increment(&truth[k - 1], &truth[k]);
            if noisy {
                let n = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                let w = chol * n;
                for (di, wi) in d.iter_mut().zip(w.iter()) {
                    *di += wi;
                }
            }
            events.push(LogEvent::DeadReckoning(DrRecord { t: k as f64, dr: d, q_diag }));
        }
        for &i in &rangings_at[k] {
            let ref_position = scenario.ref_waypoints[scenario.ranging_schedule[i].0];
            let agent = truth[k];
            let true_range = dist(&agent.position(), &ref_position);
            let reading = (true_range + cauchy_sample(&mut rng, scenario.range_noise_scale)).max(0.0);
            events.push(LogEvent::Range(RangeRecord { t: k as f64, range: reading, ref_position }));
            rangings.push(RangingTruth { step: k, agent, ref_position, true_range });
        }
    }
    Ok(Synthesis { events, truth, rangings })
}
