//! One run of the initializer over a synthesized or recorded event stream.

use rbinit_core::prelude::*;
use rbinit_core::state::Covariance4;
use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;
use crate::synth::{synthesize, LogEvent};
use crate::{rng_for, SimError, Stream};

/// What happens to ranging events once the termination condition holds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationPolicy {
    /// Keep conditioning the particle set, standing in for the
    /// covariance-based filter that would take over.
    #[default]
    Continue,
    /// Stop conditioning; later estimates are the dead reckoning re-anchored
    /// on the final initial-state estimate.
    Handoff,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSettings {
    pub base: BaseHypotheses,
    pub config: InitializerConfig,
    /// Cauchy scale the filter assumes for range errors.
    pub likelihood_scale: f64,
    pub policy: TerminationPolicy,
    pub initial_guess: StateVector,
}

impl FilterSettings {
    pub fn with_granularity_deg(deg: f64) -> FilterSettings {
        FilterSettings {
            base: BaseHypotheses::with_granularity_deg(deg),
            config: InitializerConfig::default(),
            likelihood_scale: 1.0,
            policy: TerminationPolicy::default(),
            initial_guess: StateVector::ZERO,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.base.validate()?;
        self.config.validate()?;
        if !(self.likelihood_scale > 0.0 && self.likelihood_scale.is_finite()) {
            return Err(SimError::Config(format!("sigma must be positive, got {}", self.likelihood_scale)));
        }
        Ok(())
    }
}

/// Filter output right after one ranging event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub ranging_index: usize,
    pub t: f64,
    pub estimate: StateVector,
    pub cov_diag: [f64; 4],
    pub x0_hat: StateVector,
    pub p0_diag: [f64; 4],
    /// The reading was used to condition the particles.
    pub conditioned: bool,
    pub terminated: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunOutput {
    pub estimates: Vec<EstimateRecord>,
    pub snapshots: Vec<Snapshot>,
    pub warnings: Vec<String>,
    /// Ranging index at which the termination condition first held.
    pub termination_index: Option<usize>,
    /// Particle-heading cos/sin evaluations.
    pub trig_evals: u64,
    pub particle_count: usize,
}

/// Checks the structural invariants of an event stream: finite values,
/// non-negative variances and ranges, non-decreasing times. Line numbers are
/// 1-based positions in `events`.
pub fn validate_events(events: &[LogEvent]) -> Result<(), SimError> {
    let mut last = f64::NEG_INFINITY;
    for (i, ev) in events.iter().enumerate() {
        let line = i + 1;
        let fail = |m: &str| Err(SimError::Parse { line, message: m.to_string() });
        let t = ev.time();
        if !t.is_finite() {
            return fail("non-finite timestamp");
        }
        if t < last {
            return fail(&format!("timestamp {t} is earlier than the previous event ({last})"));
        }
        last = t;
        match ev {
            LogEvent::DeadReckoning(d) => {
                if !d.dr.iter().all(|v| v.is_finite()) {
                    return fail("non-finite dead-reckoning increment");
                }
                if !d.q_diag.iter().all(|v| v.is_finite() && *v >= 0.0) {
                    return fail("Q_diag entries must be finite and non-negative");
                }
            }
            LogEvent::Range(r) => {
                if !(r.range.is_finite() && r.range >= 0.0) {
                    return fail(&format!("range must be finite and non-negative, got {}", r.range));
                }
                if !r.ref_position.iter().all(|v| v.is_finite()) {
                    return fail("non-finite reference position");
                }
            }
        }
    }
    Ok(())
}

/// Feeds `events` through a fresh initializer.
pub fn run_events<N: NormalSource + ?Sized>(
    events: &[LogEvent],
    settings: &FilterSettings,
    normals: &mut N,
    keep_snapshots: bool,
) -> Result<RunOutput, SimError> {
    settings.validate()?;
    validate_events(events)?;
    let likelihood = CauchyLikelihood::new(settings.likelihood_scale)?;
    let mut init = Initializer::new(settings.base.clone(), settings.config)?.with_initial_guess(settings.initial_guess);
    let mut out = RunOutput::default();

    for ev in events {
        match ev {
            LogEvent::DeadReckoning(d) => {
                let q = Covariance4::from_diagonal(d.q_diag);
                init.apply_increment(&DeadReckoningIncrement::new(d.dr, q)?);
            }
            LogEvent::Range(r) => {
                let ranging_index = out.estimates.len();
                let meas = RangeMeasurement::new(r.range, r.ref_position)?;
                let conditioned = match (init.is_terminated(), settings.policy) {
                    (true, TerminationPolicy::Handoff) => false,
                    (terminated, _) => {
                        if terminated {
                            init.resume();
                        }
                        true
                    }
                };
                let snapshot = if conditioned {
                    let event = init.on_range(&meas, &likelihood, normals)?;
                    if let RangeEvent::Updated(o) = &event {
                        if let UpdateOutcome::Discarded { likelihood_mass } = o.update {
                            out.warnings.push(format!(
                                "ranging {ranging_index}: likelihood mass {likelihood_mass:e} underflowed, update discarded"
                            ));
                        }
                    }
                    if init.state().is_some_and(|s| s.degenerate_heading()) {
                        out.warnings.push(format!(
                            "ranging {ranging_index}: heading vector sum vanished, mean heading set to 0"
                        ));
                    }
                    event.snapshot().clone()
                } else {
                    init.state().expect("terminated implies seeded").snapshot()
                };
                let terminated = init.is_terminated();
                if terminated && out.termination_index.is_none() {
                    out.termination_index = Some(ranging_index);
                }
                let state = init.state().expect("seeded after a range");
                let (estimate, cov) = init.current_estimate();
                out.estimates.push(EstimateRecord {
                    ranging_index,
                    t: r.t,
                    estimate,
                    cov_diag: cov.diagonal(),
                    x0_hat: state.x0_hat(),
                    p0_diag: state.p0_hat().diagonal(),
                    conditioned,
                    terminated,
                });
                if keep_snapshots {
                    out.snapshots.push(snapshot);
                }
            }
        }
    }
    if let Some(s) = init.state() {
        out.trig_evals = s.trig_evals();
        out.particle_count = s.particle_count();
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizationResult {
    pub seed: u64,
    /// `‖x̂_ℓ|ℓ − p_ℓ‖` per ranging event, meters.
    pub errors: Vec<f64>,
    pub truth: Vec<StateVector>,
    pub run: RunOutput,
}

impl RealizationResult {
    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("scenarios have at least one ranging")
    }
}

/// Synthesizes the scenario under `seed` and runs the initializer on it.
/// Resampling draws come from an independent stream of the same seed.
pub fn run_realization(
    scenario: &Scenario,
    settings: &FilterSettings,
    seed: u64,
    keep_snapshots: bool,
) -> Result<RealizationResult, SimError> {
    let synth = synthesize(scenario, seed)?;
    let mut normals = RngNormals(rng_for(seed, Stream::Filter));
    let run = run_events(&synth.events, settings, &mut normals, keep_snapshots)?;
    let truth: Vec<StateVector> = synth.rangings.iter().map(|r| r.agent).collect();
    let errors = run.estimates.iter().zip(&truth).map(|(e, t)| e.estimate.position_distance(t)).collect();
    Ok(RealizationResult { seed, errors, truth, run })
}
