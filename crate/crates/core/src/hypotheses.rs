//! Deterministic base hypotheses whose Cartesian product seeds the particle
//! set: heights, true-range offsets, bearings and headings.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::InitError;

/// Grids over height, range, bearing and heading.
///
/// Bearings and headings tile `[0, 2π)` with the given granularity, which must
/// divide a full turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseHypotheses {
    /// `(height, weight)` pairs; heights are hypotheses of the initial `z`.
    pub heights: Vec<(f64, f64)>,
    /// Offsets added to the first range reading to form true-range hypotheses.
    pub range_offsets: Vec<f64>,
    /// Radians.
    pub bearing_granularity: f64,
    /// Radians.
    pub heading_granularity: f64,
    /// Prior weight per heading hypothesis; uniform when absent.
    pub heading_weights: Option<Vec<f64>>,
}

/// Number of grid points when `granularity` tiles a full turn.
pub fn tiling_count(granularity: f64) -> Result<usize, InitError> {
    if !(granularity.is_finite() && granularity > 0.0) {
        return Err(InitError::InvalidHypotheses(format!("granularity must be positive, got {granularity}")));
    }
    let count = (TAU / granularity).round();
    if count < 1.0 || (count * granularity - TAU).abs() > 1e-9 {
        return Err(InitError::InvalidHypotheses(format!(
            "granularity {:.6}° does not divide 360°",
            granularity.to_degrees()
        )));
    }
    Ok(count as usize)
}

impl BaseHypotheses {
    /// Heights (−0.5, 0, 0.5) m and range offsets (−1, 0, +1) m, all equally
    /// weighted, with the same granularity for bearing and heading.
    pub fn with_granularity(granularity: f64) -> Self {
        BaseHypotheses {
            heights: vec![(-0.5, 1.0), (0.0, 1.0), (0.5, 1.0)],
            range_offsets: vec![-1.0, 0.0, 1.0],
            bearing_granularity: granularity,
            heading_granularity: granularity,
            heading_weights: None,
        }
    }

    pub fn with_granularity_deg(deg: f64) -> Self {
        Self::with_granularity(deg.to_radians())
    }

    pub fn bearing_count(&self) -> Result<usize, InitError> {
        tiling_count(self.bearing_granularity)
    }

    pub fn heading_count(&self) -> Result<usize, InitError> {
        tiling_count(self.heading_granularity)
    }

    /// Particle count implied by the product of all four grids.
    pub fn particle_count(&self) -> Result<usize, InitError> {
        self.validate()?;
        Ok(self.heights.len() * self.range_offsets.len() * self.bearing_count()? * self.heading_count()?)
    }

    pub fn validate(&self) -> Result<(), InitError> {
        let bad = |m: &str| Err(InitError::InvalidHypotheses(m.to_string()));
        if self.heights.is_empty() {
            return bad("no height hypotheses");
        }
        if self.range_offsets.is_empty() {
            return bad("no range hypotheses");
        }
        if self.heights.iter().any(|(h, w)| !h.is_finite() || !w.is_finite() || *w < 0.0) {
            return bad("height hypotheses must be finite with non-negative weights");
        }
        if !self.heights.iter().any(|(_, w)| *w > 0.0) {
            return bad("at least one height weight must be positive");
        }
        if self.range_offsets.iter().any(|r| !r.is_finite()) {
            return bad("range offsets must be finite");
        }
        self.bearing_count()?;
        let n_heading = self.heading_count()?;
        if let Some(w) = &self.heading_weights {
            if w.len() != n_heading {
                return Err(InitError::InvalidHypotheses(format!(
                    "{} heading weights for {} heading hypotheses",
                    w.len(),
                    n_heading
                )));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return bad("heading weights must be finite and non-negative");
            }
            if !w.iter().any(|v| *v > 0.0) {
                return bad("at least one heading weight must be positive");
            }
        }
        Ok(())
    }
}
