//! Explicit leapfrog schemes for the TE and TM polarizations on a surface.
//!
//! Fields are stored as per-cell component values: the edge field is the
//! tangential component along each oriented edge (so `value * |e|` is the
//! edge cochain) and the face field is the normal component on each face.
//! The edge field lives at half-integer steps and the face field at integer
//! steps.
//!
//! | polarization | edge field (n - 1/2) | face field (n) | edge material | face material |
//! |---|---|---|---|---|
//! | TE | E | H | epsilon, sigma | mu, sigma_m |
//! | TM | H | E | mu, sigma_m | epsilon, sigma |

mod diagnostics;
mod materials;
mod run;
mod scheme;
mod source;
mod stability;

use thiserror::Error;

pub use diagnostics::{
    divergence_free_edge_field, divergence_residuals, energy, leapfrog_energy, ChargeHistory, DivergenceResiduals,
};
pub use materials::MaterialField;
pub use run::{run, Frame, Probe, RunOutput, RunParams};
pub use scheme::{te_step, tm_step, Solver, UpdateCoefficients};
pub use source::{apply_gaussian_source, CurrentSource, GaussianPulse, NoSource, SourceSpec, SourceTarget};
pub use stability::{cfl_dt, spectral_dt_oracle, wave_speed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Polarization {
    #[serde(alias = "te")]
    Te,
    #[serde(alias = "tm")]
    Tm,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::Te => "TE",
            Polarization::Tm => "TM",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("{what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid material at cell {cell}: {reason}")]
    InvalidMaterial { cell: usize, reason: &'static str },
    #[error("state is {found}, solver is {expected}")]
    PolarizationMismatch {
        expected: Polarization,
        found: Polarization,
    },
    #[error("state time step {found} does not match solver time step {expected}")]
    StaggeringMismatch { expected: f64, found: f64 },
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("edge {edge} has non-positive dual length {length:e}")]
    NonPositiveDualLength { edge: usize, length: f64 },
    #[error("non-finite field value after step {step}")]
    NonFinite { step: u64 },
    #[error("{kind} id {id} out of range ({count} cells)")]
    CellOutOfRange {
        kind: &'static str,
        id: usize,
        count: usize,
    },
    #[error("pulse width must be positive, got {0}")]
    InvalidPulseWidth(f64),
    #[error("power iteration did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("frame stride must be at least 1")]
    InvalidFrameStride,
    #[error("wave speed must be positive and finite, got {0}")]
    InvalidWaveSpeed(f64),
}

/// Staggered field pair at step `step`: the face field at `step * dt` and
/// the edge field at `(step - 1/2) * dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub polarization: Polarization,
    pub edge_field: Vec<f64>,
    pub face_field: Vec<f64>,
    pub step: u64,
    pub dt: f64,
}

impl SimState {
    pub fn zeros(polarization: Polarization, n_edges: usize, n_faces: usize, dt: f64) -> Self {
        Self {
            polarization,
            edge_field: vec![0.0; n_edges],
            face_field: vec![0.0; n_faces],
            step: 0,
            dt,
        }
    }

    pub fn face_time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn edge_time(&self) -> f64 {
        (self.step as f64 - 0.5) * self.dt
    }

    pub fn max_abs(&self) -> f64 {
        self.edge_field
            .iter()
            .chain(&self.face_field)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.edge_field.iter().chain(&self.face_field).all(|v| v.is_finite())
    }
}
