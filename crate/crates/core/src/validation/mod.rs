//! Executable checks of the scheme's claimed properties: reduction to Yee on
//! rectangles, the CFL threshold, Gauss-law preservation, energy behaviour,
//! convergence order against analytic cavity modes and the spacetime
//! identities.

mod convergence;
mod modes;
mod structure;
mod yee;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mesh::{DualMesh, MeshError, SimplicialSurface};
use crate::solver::{
    cfl_dt, divergence_free_edge_field, divergence_residuals, energy, leapfrog_energy, wave_speed, ChargeHistory,
    MaterialField, NoSource, Polarization, SimState, Solver, SolverError,
};
use crate::spacetime::SpacetimeError;

pub use convergence::{cavity_error, convergence_study, ConvergenceConfig, ConvergenceReport, MeshFamily};
pub use modes::{cavity_solution, triangle_cavity_solution, CavityMode};
pub use structure::{embedded_trajectory_check, variational_checks, VariationalReport};
pub use yee::{yee_equivalence, YeeReport};

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error("run at spacing {spacing:e} became unstable at step {step}")]
    Unstable { spacing: f64, step: u64 },
    #[error("invalid study setup: {0}")]
    InvalidSetup(String),
}

/// Random fields of size `amplitude`, with the conducting wall respected
/// in TE.
fn random_state(solver: &Solver, complex: &SimplicialSurface, rng: &mut ChaCha8Rng, amplitude: f64) -> SimState {
    let te = solver.polarization() == Polarization::Te;
    let edge = (0..complex.n_edges())
        .map(|e| {
            let v = amplitude * rng.gen_range(-1.0..1.0);
            if te && complex.is_boundary_edge(e) {
                0.0
            } else {
                v
            }
        })
        .collect();
    let face = (0..complex.n_faces())
        .map(|_| amplitude * rng.gen_range(-1.0..1.0))
        .collect();
    solver.state(edge, face).expect("sizes come from the complex")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    /// Energy exceeded the threshold at this step.
    Unstable {
        step: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub cfl_dt: f64,
    pub outcomes: Vec<(f64, Stability)>,
}

impl StabilityReport {
    pub fn outcome(&self, factor: f64) -> Option<Stability> {
        self.outcomes.iter().find(|(f, _)| *f == factor).map(|&(_, s)| s)
    }

    /// True when no probed factor is stable above an unstable one.
    pub fn is_monotone(&self) -> bool {
        self.outcomes.iter().all(|&(f, s)| {
            !matches!(s, Stability::Unstable { .. })
                || self
                    .outcomes
                    .iter()
                    .all(|&(g, t)| g <= f || matches!(t, Stability::Unstable { .. }))
        })
    }
}

/// Energy growth that counts as a blow-up.
pub const UNSTABLE_ENERGY_RATIO: f64 = 1e3;

/// Runs vacuum leapfrog from small random data at `dt = factor * cfl_dt`
/// for each factor. A run is unstable once its energy exceeds
/// [`UNSTABLE_ENERGY_RATIO`] times the initial energy.
pub fn stability_probe(
    complex: &SimplicialSurface,
    dual: &DualMesh,
    polarization: Polarization,
    factors: &[f64],
    n_steps: u64,
    seed: u64,
) -> Result<StabilityReport, ValidationError> {
    if let Some(f) = factors.iter().find(|&&f| !(f > 0.0 && f.is_finite())) {
        return Err(ValidationError::InvalidSetup(format!(
            "step factor {f} is not positive"
        )));
    }
    let materials = MaterialField::vacuum(complex, polarization);
    let limit = cfl_dt(complex, dual, wave_speed(&materials))?;
    let mut outcomes = Vec::with_capacity(factors.len());
    for &factor in factors {
        let solver = Solver::new(complex, dual, &materials, factor * limit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = random_state(&solver, complex, &mut rng, 1e-3);
        let e0 = energy(&state, &materials, dual);
        let mut outcome = Stability::Stable;
        for _ in 0..n_steps {
            let blown = match solver.step(&mut state, &NoSource) {
                Ok(()) => energy(&state, &materials, dual) > UNSTABLE_ENERGY_RATIO * e0,
                Err(SolverError::NonFinite { .. }) => true,
                Err(e) => return Err(e.into()),
            };
            if blown {
                outcome = Stability::Unstable { step: state.step };
                break;
            }
        }
        log::debug!("stability factor {factor}: {outcome:?}");
        outcomes.push((factor, outcome));
    }
    Ok(StabilityReport {
        cfl_dt: limit,
        outcomes,
    })
}

/// Initial data for [`divergence_preservation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialData {
    /// In-plane field built from a random face potential.
    DivergenceFree,
    /// Uniformly random in-plane field, with a nonzero divergence.
    Divergent,
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceRun {
    /// Max Gauss-law residual at every step, starting with step 0.
    pub residuals: Vec<f64>,
    /// Max over the run of the edge flux max-norm.
    pub field_scale: f64,
}

impl DivergenceRun {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn relative(&self) -> f64 {
        if self.field_scale == 0.0 {
            self.max_residual()
        } else {
            self.max_residual() / self.field_scale
        }
    }
}

/// Steps a source-free vacuum run and records the Gauss-law residual of the
/// in-plane field after every step. The residual is measured against zero
/// charge, so divergent initial data shows its own (constant) violation.
pub fn divergence_preservation(
    complex: &SimplicialSurface,
    dual: &DualMesh,
    polarization: Polarization,
    initial: InitialData,
    n_steps: u64,
    seed: u64,
) -> Result<DivergenceRun, ValidationError> {
    let materials = MaterialField::vacuum(complex, polarization);
    let dt = 0.9 * cfl_dt(complex, dual, 1.0)?;
    let solver = Solver::new(complex, dual, &materials, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = match initial {
        InitialData::Zero => solver.zero_state(),
        InitialData::Divergent => random_state(&solver, complex, &mut rng, 1.0),
        InitialData::DivergenceFree => {
            let psi: Vec<f64> = (0..complex.n_faces()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut st = random_state(&solver, complex, &mut rng, 1.0);
            // scale the in-plane field to order one as well
            let edge = divergence_free_edge_field(complex, dual, &materials, &psi);
            let size = edge.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            st.edge_field = edge.iter().map(|v| if size > 0.0 { v / size } else { 0.0 }).collect();
            st
        }
    };
    let mut charges = ChargeHistory::new(complex.n_vertices());
    let r0 = divergence_residuals(&state, &solver, &charges);
    let mut residuals = Vec::with_capacity(n_steps as usize + 1);
    residuals.push(r0.max());
    let mut field_scale = r0.flux_scale;
    for _ in 0..n_steps {
        solver.step_tracking(&mut state, &NoSource, &mut charges)?;
        let r = divergence_residuals(&state, &solver, &charges);
        residuals.push(r.max());
        field_scale = field_scale.max(r.flux_scale);
    }
    Ok(DivergenceRun { residuals, field_scale })
}

/// Energy record of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTrace {
    /// The conserved quadratic form of leapfrog at every step.
    pub leapfrog: Vec<f64>,
    /// The naive energy of the stored (half-step apart) fields.
    pub naive: Vec<f64>,
}

fn band(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if values.is_empty() || values[0] == 0.0 {
        0.0
    } else {
        (hi - lo) / values[0]
    }
}

/// Largest step-to-step increase relative to the initial value.
fn max_increase(values: &[f64]) -> f64 {
    let rise = values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if values.is_empty() || values[0] == 0.0 {
        rise
    } else {
        rise / values[0]
    }
}

impl EnergyTrace {
    /// `(max - min) / initial` of the leapfrog energy.
    pub fn relative_band(&self) -> f64 {
        band(&self.leapfrog)
    }

    pub fn naive_relative_band(&self) -> f64 {
        band(&self.naive)
    }

    /// Largest one-step rise of the leapfrog energy, relative to its
    /// initial value (0 when non-increasing).
    pub fn max_relative_increase(&self) -> f64 {
        max_increase(&self.leapfrog)
    }

    pub fn naive_max_relative_increase(&self) -> f64 {
        max_increase(&self.naive)
    }
}

/// Runs from random initial data at `cfl_fraction * cfl_dt` in a uniform
/// medium with conductivities `sigma` (electric) and `sigma_m` (magnetic)
/// and records both energies.
pub fn energy_trace(
    complex: &SimplicialSurface,
    dual: &DualMesh,
    polarization: Polarization,
    sigma: f64,
    sigma_m: f64,
    cfl_fraction: f64,
    n_steps: u64,
    seed: u64,
) -> Result<EnergyTrace, ValidationError> {
    let materials = MaterialField::uniform(complex, polarization, 1.0, 1.0, sigma, sigma_m)?;
    let dt = cfl_fraction * cfl_dt(complex, dual, wave_speed(&materials))?;
    let solver = Solver::new(complex, dual, &materials, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = random_state(&solver, complex, &mut rng, 1.0);
    let mut trace = EnergyTrace {
        leapfrog: Vec::with_capacity(n_steps as usize + 1),
        naive: Vec::with_capacity(n_steps as usize + 1),
    };
    for i in 0..=n_steps {
        if i > 0 {
            solver.step(&mut state, &NoSource)?;
        }
        trace.leapfrog.push(leapfrog_energy(&state, &solver));
        trace.naive.push(energy(&state, &materials, dual));
    }
    Ok(trace)
}
