//! Event-driven wrapper: accumulates dead reckoning until the first range,
//! seeds, then routes every further range through `process_measurement`.

use crate::dead_reckoning::{DeadReckoningIncrement, DeadReckoningTrack};
use crate::error::InitError;
use crate::filter::{seed, InitializerConfig, InitializerState, MeasurementOutcome, RangeMeasurement, Snapshot};
use crate::hypotheses::BaseHypotheses;
use crate::likelihood::LikelihoodModel;
use crate::normal::NormalSource;
use crate::state::{from_zero_frame, transform_covariance, Covariance4, StateVector};

#[derive(Clone, Debug, PartialEq)]
pub enum RangeEvent {
    /// The first range seeded the particle set.
    Seeded(Snapshot),
    Updated(MeasurementOutcome),
}

impl RangeEvent {
    pub fn snapshot(&self) -> &Snapshot {
        match self {
            RangeEvent::Seeded(s) => s,
            RangeEvent::Updated(o) => &o.snapshot,
        }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
enum Phase {
    AwaitingFirstRange(DeadReckoningTrack),
    Filtering(InitializerState),
}

#[derive(Clone, Debug)]
pub struct Initializer {
    base: BaseHypotheses,
    config: InitializerConfig,
    initial_guess: StateVector,
    phase: Phase,
}

impl Initializer {
    pub fn new(base: BaseHypotheses, config: InitializerConfig) -> Result<Self, InitError> {
        base.validate()?;
        config.validate()?;
        Ok(Initializer {
            base,
            config,
            initial_guess: StateVector::ZERO,
            phase: Phase::AwaitingFirstRange(DeadReckoningTrack::zero()),
        })
    }

    /// Anchor used for pose estimates before the first range (`x̂₀|−1`).
    pub fn with_initial_guess(mut self, guess: StateVector) -> Self {
        self.initial_guess = guess;
        self
    }

    pub fn config(&self) -> &InitializerConfig {
        &self.config
    }

    pub fn base(&self) -> &BaseHypotheses {
        &self.base
    }

    pub fn state(&self) -> Option<&InitializerState> {
        match &self.phase {
            Phase::Filtering(s) => Some(s),
            Phase::AwaitingFirstRange(_) => None,
        }
    }

    pub fn zero_track(&self) -> &DeadReckoningTrack {
        match &self.phase {
            Phase::AwaitingFirstRange(t) => t,
            Phase::Filtering(s) => s.zero_track(),
        }
    }

    pub fn is_terminated(&self) -> bool {
        self.state().is_some_and(InitializerState::is_terminated)
    }

    /// See [`InitializerState::resume`].
    pub fn resume(&mut self) {
        if let Phase::Filtering(s) = &mut self.phase {
            s.resume();
        }
    }

    pub fn apply_increment(&mut self, u: &DeadReckoningIncrement) {
        match &mut self.phase {
            Phase::AwaitingFirstRange(t) => *t = t.propagate(u),
            Phase::Filtering(s) => s.apply_increment(u),
        }
    }

    pub fn on_range<L: LikelihoodModel, N: NormalSource + ?Sized>(
        &mut self,
        meas: &RangeMeasurement,
        likelihood: &L,
        normals: &mut N,
    ) -> Result<RangeEvent, InitError> {
        match &mut self.phase {
            Phase::AwaitingFirstRange(track) => {
                let state = seed(meas, track, &self.base, likelihood)?;
                let snap = state.snapshot();
                self.phase = Phase::Filtering(state);
                Ok(RangeEvent::Seeded(snap))
            }
            Phase::Filtering(state) => {
                state.process_measurement(meas, likelihood, &self.config, normals).map(RangeEvent::Updated)
            }
        }
    }

    /// Current pose and covariance. Before the first range the pose is the
    /// dead reckoning anchored at the initial guess and only the dead-reckoning
    /// covariance is known.
    pub fn current_estimate(&self) -> (StateVector, Covariance4) {
        match &self.phase {
            Phase::AwaitingFirstRange(t) => {
                (from_zero_frame(&t.mean, &self.initial_guess), transform_covariance(&t.cov, self.initial_guess.theta))
            }
            Phase::Filtering(s) => s.current_estimate(),
        }
    }
}
