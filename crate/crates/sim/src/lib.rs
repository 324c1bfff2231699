//! Simulation harness for the range-based initializer: scenario geometry,
//! measurement synthesis, single realizations, Monte-Carlo RMSE sweeps and a
//! direct-state bootstrap particle filter used as a reference.

pub mod error;
pub mod io;
pub mod oracle;
pub mod realization;
pub mod scenario;
pub mod sweep;
pub mod synth;

pub use error::SimError;
pub use realization::{run_events, run_realization, FilterSettings, RealizationResult, TerminationPolicy};
pub use scenario::Scenario;
pub use sweep::{rmse_sweep, RmseTable, DEFAULT_GRANULARITIES_DEG};
pub use synth::{synthesize, LogEvent, Synthesis};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random streams owned by one realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Synthesis = 0,
    Filter = 1,
    Oracle = 2,
}

pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Seed of realization `index` under `master`; independent of how many
/// realizations run or in which order.
pub fn realization_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(1 << 32 | index as u64);
    rng.next_u64()
}
