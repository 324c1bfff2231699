//! Run configuration: TOML file plus command-line overrides. Angles are in
//! degrees here and converted to radians when settings are built.

use std::path::{Path, PathBuf};

use rbinit_core::prelude::*;
use rbinit_sim::{FilterSettings, Scenario, TerminationPolicy, DEFAULT_GRANULARITIES_DEG};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Granularity for the single-filter commands when none is configured.
pub const DEFAULT_SINGLE_GRANULARITY_DEG: f64 = 11.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario JSON file; the built-in two-agent walk when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PathBuf>,
    pub seed: u64,
    /// Monte-Carlo realizations; per-command default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    pub out: PathBuf,
    /// Bearing and heading granularities. The sweep runs all of them; the
    /// other commands take exactly one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub granularity_deg: Option<Vec<f64>>,
    pub gamma: f64,
    pub alpha: f64,
    /// Range-likelihood scale assumed by the filters, meters.
    pub sigma: f64,
    /// Termination bounds `[m², m², m², deg²]`.
    pub gamma_cov: [f64; 4],
    /// `[height m, weight]` pairs.
    pub heights: Vec<(f64, f64)>,
    pub range_offsets: Vec<f64>,
    pub policy: TerminationPolicy,
    /// `[x, y, z, heading deg]` the zero frame is anchored on before the
    /// first estimate exists.
    pub initial_guess: [f64; 4],
    pub oracle_particles: usize,
    /// Drop dead-reckoning noise from the scenario.
    pub exact_dead_reckoning: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = BaseHypotheses::with_granularity_deg(DEFAULT_SINGLE_GRANULARITY_DEG);
        let cfg = InitializerConfig::default();
        let mut gamma_cov = cfg.gamma_cov;
        gamma_cov[3] = gamma_cov[3].sqrt().to_degrees().powi(2);
        RunConfig {
            scenario: None,
            seed: 1,
            realizations: None,
            out: PathBuf::from("out"),
            granularity_deg: None,
            gamma: cfg.gamma,
            alpha: cfg.alpha,
            sigma: 1.0,
            gamma_cov,
            heights: base.heights,
            range_offsets: base.range_offsets,
            policy: TerminationPolicy::default(),
            initial_guess: [0.0; 4],
            oracle_particles: 10_000,
            exact_dead_reckoning: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sweep_granularities(&self) -> Vec<f64> {
        self.granularity_deg.clone().unwrap_or_else(|| DEFAULT_GRANULARITIES_DEG.to_vec())
    }

    pub fn single_granularity(&self) -> Result<f64, CliError> {
        match self.granularity_deg.as_deref() {
            None => Ok(DEFAULT_SINGLE_GRANULARITY_DEG),
            Some([g]) => Ok(*g),
            Some(list) => {
                Err(CliError::Config(format!("this command runs one filter; got {} granularities", list.len())))
            }
        }
    }

    pub fn realizations_or(&self, default: usize) -> Result<usize, CliError> {
        let n = self.realizations.unwrap_or(default);
        if n == 0 {
            return Err(CliError::Config("realizations must be at least 1".into()));
        }
        Ok(n)
    }

    pub fn filter_settings(&self, granularity_deg: f64) -> Result<FilterSettings, CliError> {
        let mut gamma_cov = self.gamma_cov;
        gamma_cov[3] = gamma_cov[3].sqrt().to_radians().powi(2);
        let g = granularity_deg.to_radians();
        let [x, y, z, h] = self.initial_guess;
        let settings = FilterSettings {
            base: BaseHypotheses {
                heights: self.heights.clone(),
                range_offsets: self.range_offsets.clone(),
                bearing_granularity: g,
                heading_granularity: g,
                heading_weights: None,
            },
            config: InitializerConfig { gamma: self.gamma, alpha: self.alpha, gamma_cov },
            likelihood_scale: self.sigma,
            policy: self.policy,
            initial_guess: StateVector::new(x, y, z, h.to_radians()),
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let s = match &self.scenario {
            Some(p) => Scenario::load(p)?,
            None => Scenario::standard(),
        };
        Ok(if self.exact_dead_reckoning { s.without_dr_noise() } else { s })
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(p) = &self.scenario {
            if !p.is_file() {
                return Err(CliError::Config(format!("scenario file {} does not exist", p.display())));
            }
        }
        for g in self.sweep_granularities() {
            self.filter_settings(g)?;
        }
        if self.oracle_particles == 0 {
            return Err(CliError::Config("oracle_particles must be at least 1".into()));
        }
        if !self.initial_guess.iter().all(|v| v.is_finite()) {
            return Err(CliError::Config("initial_guess must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_filter_defaults() {
        let c = RunConfig::default();
        let s = c.filter_settings(11.25).unwrap();
        let want = InitializerConfig::default();
        assert_eq!(s.config.gamma, want.gamma);
        assert!((s.config.gamma_cov[3] - want.gamma_cov[3]).abs() < 1e-15);
        assert!((c.gamma_cov[3] - 100.0).abs() < 1e-9);
        assert_eq!(s.base, BaseHypotheses::with_granularity_deg(11.25));
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig {
            granularity_deg: Some(vec![45.0, 90.0]),
            realizations: Some(7),
            scenario: Some("walk.json".into()),
            ..Default::default()
        };
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig = toml::from_str("seed = 9\nalpha = 1.5\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.alpha, 1.5);
        assert_eq!(c.gamma, RunConfig::default().gamma);
        assert!(toml::from_str::<RunConfig>("sede = 9").is_err());
    }

    #[test]
    fn granularity_must_divide_the_circle() {
        let c = RunConfig { granularity_deg: Some(vec![7.0]), ..Default::default() };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn single_filter_commands_take_one_granularity() {
        let c = RunConfig { granularity_deg: Some(vec![45.0, 90.0]), ..Default::default() };
        assert!(c.single_granularity().is_err());
        assert_eq!(RunConfig::default().single_granularity().unwrap(), DEFAULT_SINGLE_GRANULARITY_DEG);
    }
}
