//! Recursive Bayesian initialization of an agent's position and planar
//! heading from dead reckoning and range measurements.
//!
//! The filter estimates the agent's *initial* state with a particle set. Dead
//! reckoning is accumulated in a zero frame and re-anchored on the current
//! initial-state estimate whenever a pose is needed, so the particles are
//! static and range updates need no trigonometry.
//!
//! ```
//! use rbinit_core::prelude::*;
//!
//! let lik = CauchyLikelihood::new(1.0).unwrap();
//! let mut init =
//!     Initializer::new(BaseHypotheses::with_granularity_deg(45.0), InitializerConfig::default()).unwrap();
//! init.apply_increment(&DeadReckoningIncrement::exact([1.0, 0.0, 0.0, 0.0]));
//! let mut normals = NormalTable::new(vec![0.3, -1.1, 0.7, 0.05]);
//! init.on_range(&RangeMeasurement::new(12.0, [10.0, 5.0, 0.0]).unwrap(), &lik, &mut normals).unwrap();
//! assert_eq!(init.state().unwrap().particle_count(), 576);
//! ```

pub mod dead_reckoning;
pub mod error;
pub mod filter;
pub mod hypotheses;
pub mod initializer;
pub mod likelihood;
pub mod normal;
pub mod scalar;
pub mod state;

pub use error::InitError;

pub mod prelude {
    pub use crate::dead_reckoning::{DeadReckoningIncrement, DeadReckoningTrack};
    pub use crate::error::InitError;
    pub use crate::filter::{
        check_termination, InitializerConfig, InitializerState, MeasurementOutcome, Particle, RangeMeasurement,
        Snapshot, UpdateOutcome,
    };
    pub use crate::hypotheses::BaseHypotheses;
    pub use crate::initializer::{Initializer, RangeEvent};
    pub use crate::likelihood::{CauchyLikelihood, LikelihoodModel};
    pub use crate::normal::{NormalSource, NormalTable, RngNormals};
    pub use crate::state::{Covariance4, StateVector};
}
