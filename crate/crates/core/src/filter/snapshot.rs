use serde::{Deserialize, Serialize};

use super::InitializerState;

/// A particle above the `1/N` weight level at export time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotParticle {
    pub index: usize,
    pub p0: [f64; 3],
    pub theta0: f64,
    pub weight: f64,
}

/// Per-ranging-event export record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub ell: usize,
    pub x0_hat: [f64; 4],
    #[serde(rename = "P0_diag")]
    pub p0_diag: [f64; 4],
    #[serde(rename = "P0")]
    pub p0: [[f64; 4]; 4],
    pub x_hat: [f64; 4],
    pub particles: Vec<SnapshotParticle>,
}

/// One-sigma ellipse of the horizontal position block of `P₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceEllipse {
    pub center: [f64; 2],
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Orientation of the major axis from the x axis, radians.
    pub orientation: f64,
}

impl Snapshot {
    pub(super) fn capture(state: &InitializerState) -> Snapshot {
        let n = state.particles.len();
        let level = 1.0 / n as f64;
        let particles = state
            .particles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.weight > level)
            .map(|(index, p)| SnapshotParticle { index, p0: p.p0, theta0: p.theta0, weight: p.weight })
            .collect();
        let (x_hat, _) = state.current_estimate();
        Snapshot {
            ell: state.ell,
            x0_hat: state.x0_hat.to_array(),
            p0_diag: state.p0_hat.diagonal(),
            p0: state.p0_hat.rows(),
            x_hat: x_hat.to_array(),
            particles,
        }
    }

    pub fn confidence_ellipse(&self) -> ConfidenceEllipse {
        let (a, b, c) = (self.p0[0][0], self.p0[0][1], self.p0[1][1]);
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        ConfidenceEllipse {
            center: [self.x0_hat[0], self.x0_hat[1]],
            semi_major: (mid + rad).max(0.0).sqrt(),
            semi_minor: (mid - rad).max(0.0).sqrt(),
            orientation: 0.5 * (2.0 * b).atan2(a - c),
        }
    }
}
