//! Monte-Carlo RMSE over realizations and hypothesis granularities.

use rayon::prelude::*;
use serde::Serialize;

use crate::realization::{run_realization, FilterSettings};
use crate::scenario::Scenario;
use crate::{realization_seed, SimError};

pub const DEFAULT_GRANULARITIES_DEG: [f64; 5] = [5.625, 11.25, 22.5, 45.0, 90.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RmseRow {
    pub granularity_deg: f64,
    pub n_particles: usize,
    pub ranging_index: usize,
    pub rmse_m: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RmseTable {
    pub rows: Vec<RmseRow>,
    pub warnings: Vec<String>,
}

impl RmseTable {
    /// RMSE at the last ranging event for one granularity.
    pub fn final_rmse(&self, granularity_deg: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.granularity_deg == granularity_deg)
            .max_by_key(|r| r.ranging_index)
            .map(|r| r.rmse_m)
    }

    pub fn curve(&self, granularity_deg: f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.granularity_deg == granularity_deg).map(|r| r.rmse_m).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| SimError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| SimError::Io(e.to_string()))
    }
}

/// Per-ranging position errors and warnings of one realization.
pub type RealizationErrors = (Vec<f64>, Vec<String>);

/// Per-realization errors for one granularity; realization `i` uses
/// `realization_seed(master_seed, i)` whatever the granularity, so curves
/// share their measurement noise.
pub fn realization_errors(
    scenario: &Scenario,
    settings: &FilterSettings,
    n_realizations: usize,
    master_seed: u64,
) -> Result<Vec<RealizationErrors>, SimError> {
    (0..n_realizations)
        .into_par_iter()
        .map(|i| {
            let seed = realization_seed(master_seed, i);
            run_realization(scenario, settings, seed, false).map(|r| (r.errors, r.run.warnings))
        })
        .collect()
}

/// Position RMSE per ranging index for every granularity in `granularities_deg`.
/// `template` supplies everything but the hypothesis granularity.
pub fn rmse_sweep(
    scenario: &Scenario,
    template: &FilterSettings,
    granularities_deg: &[f64],
    n_realizations: usize,
    master_seed: u64,
) -> Result<RmseTable, SimError> {
    if n_realizations == 0 {
        return Err(SimError::Config("at least one realization is required".into()));
    }
    let mut table = RmseTable::default();
    for &g in granularities_deg {
        let mut settings = template.clone();
        let deg = g.to_radians();
        settings.base.bearing_granularity = deg;
        settings.base.heading_granularity = deg;
        settings.base.heading_weights = None;
        settings.validate()?;
        let n_particles = settings.base.particle_count()?;
        let runs = realization_errors(scenario, &settings, n_realizations, master_seed)?;
        let events = scenario.ranging_count();
        let mut sq = vec![0.0; events];
        for (i, (errors, warnings)) in runs.iter().enumerate() {
            for (acc, e) in sq.iter_mut().zip(errors) {
                *acc += e * e;
            }
            table.warnings.extend(warnings.iter().map(|w| format!("{g} deg, realization {i}: {w}")));
        }
        for (ranging_index, s) in sq.into_iter().enumerate() {
            table.rows.push(RmseRow {
                granularity_deg: g,
                n_particles,
                ranging_index,
                rmse_m: (s / n_realizations as f64).sqrt(),
            });
        }
    }
    Ok(table)
}
