//! Two-agent scenarios: a reference agent (already localized) and a joining
//! agent, with the ranging events between them.

use std::path::Path;

use rbinit_core::state::Covariance4;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// JSON schema of a scenario file. Heading variance in `dr_noise_diag` is in
/// degrees squared; everything else is SI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub ref_waypoints: Vec<[f64; 3]>,
    pub agent_waypoints: Vec<[f64; 3]>,
    /// `(reference waypoint index, agent waypoint index)` per ranging event.
    pub ranging_schedule: Vec<(usize, usize)>,
    pub sigma: f64,
    /// Per-step dead-reckoning error variances `[m², m², m², deg²]`.
    pub dr_noise_diag: [f64; 4],
    #[serde(default = "default_step_length")]
    pub step_length: f64,
    /// Agent waypoint where dead reckoning starts; defaults to the first
    /// ranging event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join_waypoint: Option<usize>,
}

fn default_step_length() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub ref_waypoints: Vec<[f64; 3]>,
    pub agent_waypoints: Vec<[f64; 3]>,
    pub ranging_schedule: Vec<(usize, usize)>,
    /// Maximum length of one dead-reckoning step along the agent path, meters.
    pub step_length: f64,
    /// Cauchy scale of the range noise, meters.
    pub range_noise_scale: f64,
    /// Per-step error covariance of the dead-reckoning increments (radians).
    pub dr_noise: Covariance4,
    /// Agent waypoint at which the agent joins and starts dead reckoning;
    /// `None` joins at the first ranging event. Path before it is not seen
    /// by the filter.
    pub join_waypoint: Option<usize>,
}

const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.json");

impl Scenario {
    /// The two-agent walk with eight ranging events, σ = 1 m.
    pub fn standard() -> Scenario {
        let file: ScenarioFile = serde_json::from_str(DEFAULT_SCENARIO).expect("bundled scenario parses");
        Scenario::from_file(file).expect("bundled scenario is valid")
    }

    /// Same reference walk, but the joining agent stands still at its
    /// first-ranging position for every event.
    pub fn static_agent() -> Scenario {
        let mut s = Scenario::standard();
        let (_, first_agent) = s.ranging_schedule[0];
        let stand = s.agent_waypoints[first_agent];
        s.agent_waypoints = vec![stand];
        for ev in &mut s.ranging_schedule {
            ev.1 = 0;
        }
        s.join_waypoint = None;
        s
    }

    /// Copy with exact dead reckoning.
    pub fn without_dr_noise(&self) -> Scenario {
        Scenario { dr_noise: Covariance4::zeros(), ..self.clone() }
    }

    pub fn with_range_noise(&self, scale: f64) -> Scenario {
        Scenario { range_noise_scale: scale, ..self.clone() }
    }

    pub fn from_file(file: ScenarioFile) -> Result<Scenario, SimError> {
        let d = file.dr_noise_diag;
        let s = Scenario {
            ref_waypoints: file.ref_waypoints,
            agent_waypoints: file.agent_waypoints,
            ranging_schedule: file.ranging_schedule,
            step_length: file.step_length,
            range_noise_scale: file.sigma,
            dr_noise: Covariance4::from_diagonal([d[0], d[1], d[2], d[3] * (1f64.to_radians()).powi(2)]),
            join_waypoint: file.join_waypoint,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn to_file(&self) -> ScenarioFile {
        let d = self.dr_noise.diagonal();
        ScenarioFile {
            ref_waypoints: self.ref_waypoints.clone(),
            agent_waypoints: self.agent_waypoints.clone(),
            ranging_schedule: self.ranging_schedule.clone(),
            sigma: self.range_noise_scale,
            dr_noise_diag: [d[0], d[1], d[2], d[3] / (1f64.to_radians()).powi(2)],
            step_length: self.step_length,
            join_waypoint: self.join_waypoint,
        }
    }

    pub fn load(path: &Path) -> Result<Scenario, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("cannot read scenario {}: {e}", path.display())))?;
        let file: ScenarioFile =
            serde_json::from_str(&text).map_err(|e| SimError::Config(format!("scenario {}: {e}", path.display())))?;
        Scenario::from_file(file)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.ref_waypoints.is_empty() || self.agent_waypoints.is_empty() {
            return bad("waypoint lists must be non-empty".into());
        }
        if self.ranging_schedule.is_empty() {
            return bad("ranging schedule is empty".into());
        }
        let finite = |w: &Vec<[f64; 3]>| w.iter().flatten().all(|v| v.is_finite());
        if !finite(&self.ref_waypoints) || !finite(&self.agent_waypoints) {
            return bad("waypoints must be finite".into());
        }
        for (i, &(r, a)) in self.ranging_schedule.iter().enumerate() {
            if r >= self.ref_waypoints.len() || a >= self.agent_waypoints.len() {
                return bad(format!("ranging event {i} references ({r}, {a}) outside the trajectories"));
            }
        }
        if self.ranging_schedule.windows(2).any(|w| w[1].1 < w[0].1) {
            return bad("ranging events must be ordered along the agent path".into());
        }
        if let Some(j) = self.join_waypoint {
            if j > self.ranging_schedule[0].1 {
                return bad(format!("join waypoint {j} is after the first ranging event"));
            }
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return bad(format!("step length must be positive, got {}", self.step_length));
        }
        if !(self.range_noise_scale >= 0.0 && self.range_noise_scale.is_finite()) {
            return bad(format!("range noise scale must be non-negative, got {}", self.range_noise_scale));
        }
        if !self.dr_noise.diagonal().iter().all(|v| *v >= 0.0 && v.is_finite()) {
            return bad("dead-reckoning noise variances must be non-negative".into());
        }
        Ok(())
    }

    /// Length of the joining agent's path.
    pub fn agent_path_length(&self) -> f64 {
        self.agent_waypoints.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }

    /// Agent waypoint where the filter's dead reckoning starts.
    pub fn join_index(&self) -> usize {
        self.join_waypoint.unwrap_or(self.ranging_schedule[0].1)
    }

    pub fn ranging_count(&self) -> usize {
        self.ranging_schedule.len()
    }
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
