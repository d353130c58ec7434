//! Observed convergence order against analytic cavity modes.

use serde::{Deserialize, Serialize};

use super::modes::{cavity_solution, triangle_cavity_solution, CavityMode};
use super::ValidationError;
use crate::mesh::{build_dual, generate, DualMesh, DualMode, SimplicialSurface};
use crate::solver::{cfl_dt, MaterialField, NoSource, Polarization, Solver, SolverError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFamily {
    /// `N x N` squares on the unit square.
    UniformQuad,
    /// Jittered acute subdivisions of the unit equilateral triangle.
    UnstructuredTri,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub polarization: Polarization,
    pub family: MeshFamily,
    /// Rectangle mode indices, or the triangle's reciprocal-lattice
    /// coordinates for the unstructured family.
    pub mode: (i64, i64),
    pub final_time: f64,
    /// Subdivisions per side.
    pub resolutions: Vec<usize>,
    /// `dt = cfl_fraction * cfl_dt`, shrunk so that a whole number of
    /// steps reaches `final_time`.
    pub cfl_fraction: f64,
    pub epsilon: f64,
    pub mu: f64,
    /// Vertex jitter of the unstructured family, as a fraction of the
    /// spacing.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            polarization: Polarization::Te,
            family: MeshFamily::UniformQuad,
            mode: (1, 1),
            final_time: 1.0,
            resolutions: vec![8, 16, 32, 64],
            cfl_fraction: 0.99,
            epsilon: 1.0,
            mu: 1.0,
            jitter: 0.25,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Mesh spacings, strictly decreasing.
    pub resolutions: Vec<f64>,
    /// Weighted L2 errors at the final time.
    pub errors: Vec<f64>,
    pub time_steps: Vec<f64>,
    /// Least-squares slope of `log error` against `log spacing`.
    pub observed_order: f64,
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Weighted L2 distance `sqrt(sum W_e du^2 + sum W_f dw^2)` between a run
/// of `n_steps` from the exact mode and the exact mode itself. The edge
/// field starts at `-dt/2` and the face field at 0, as leapfrog expects.
/// The weights are the solver's energy weights `m |e| |*e|` and `m |P|`.
pub fn cavity_error(
    complex: &SimplicialSurface,
    dual: &DualMesh,
    mode: &CavityMode,
    dt: f64,
    n_steps: u64,
) -> Result<f64, ValidationError> {
    let materials = MaterialField::uniform(complex, mode.polarization, mode.epsilon, mode.mu, 0.0, 0.0)?;
    let solver = Solver::new(complex, dual, &materials, dt)?;
    let mut state = solver.state(
        mode.edge_cochain(complex, -0.5 * dt),
        mode.face_cochain(complex, dual, 0.0),
    )?;
    for _ in 0..n_steps {
        match solver.step(&mut state, &NoSource) {
            Err(SolverError::NonFinite { step }) => {
                return Err(ValidationError::Unstable {
                    spacing: dual.edge_lengths.iter().copied().fold(0.0, f64::max),
                    step,
                })
            }
            r => r?,
        }
    }
    let exact_edge = mode.edge_cochain(complex, state.edge_time());
    let exact_face = mode.face_cochain(complex, dual, state.face_time());
    let edge: f64 = state
        .edge_field
        .iter()
        .zip(&exact_edge)
        .zip(&solver.edge_weight)
        .map(|((u, x), w)| w * (u - x).powi(2))
        .sum();
    let face: f64 = state
        .face_field
        .iter()
        .zip(&exact_face)
        .zip(&solver.face_weight)
        .map(|((u, x), w)| w * (u - x).powi(2))
        .sum();
    Ok((edge + face).sqrt())
}

/// Runs the mode to `final_time` on every resolution of the family and
/// fits the observed order. A run that produces non-finite values aborts
/// the study.
pub fn convergence_study(config: &ConvergenceConfig) -> Result<ConvergenceReport, ValidationError> {
    let bad = |m: String| Err(ValidationError::InvalidSetup(m));
    if config.resolutions.len() < 3 {
        return bad("a convergence study needs at least 3 resolutions".into());
    }
    if config.resolutions.windows(2).any(|w| w[1] <= w[0]) || config.resolutions[0] == 0 {
        return bad("resolutions must be positive and strictly increasing".into());
    }
    if !(config.final_time > 0.0 && config.final_time.is_finite()) {
        return bad(format!("final time {} is not positive", config.final_time));
    }
    if !(config.cfl_fraction > 0.0 && config.cfl_fraction <= 1.0) {
        return bad(format!("CFL fraction {} is outside (0, 1]", config.cfl_fraction));
    }
    if !(config.epsilon > 0.0 && config.mu > 0.0) {
        return bad("epsilon and mu must be positive".into());
    }
    let (m, n) = config.mode;
    let mode = match config.family {
        MeshFamily::UniformQuad => {
            if m < 1 || n < 1 {
                return bad(format!("rectangle mode ({m}, {n}) needs indices of at least 1"));
            }
            cavity_solution(
                config.polarization,
                m as usize,
                n as usize,
                1.0,
                1.0,
                config.epsilon,
                config.mu,
            )
        }
        MeshFamily::UnstructuredTri => {
            triangle_cavity_solution(config.polarization, m, n, 1.0, config.epsilon, config.mu)
        }
    };
    if mode.wavenumber_squared() == 0.0 {
        return bad(format!("mode ({m}, {n}) is constant"));
    }
    let c = 1.0 / (config.epsilon * config.mu).sqrt();

    let mut report = ConvergenceReport {
        resolutions: Vec::new(),
        errors: Vec::new(),
        time_steps: Vec::new(),
        observed_order: f64::NAN,
    };
    for &res in &config.resolutions {
        let h = 1.0 / res as f64;
        let complex = match config.family {
            MeshFamily::UniformQuad => generate::quad_grid(res, res, h, h),
            MeshFamily::UnstructuredTri => {
                generate::jittered_equilateral(res, 1.0, config.jitter, config.seed.wrapping_add(res as u64))
            }
        };
        let dual = build_dual(&complex, DualMode::Strict)?;
        let limit = config.cfl_fraction * cfl_dt(&complex, &dual, c)?;
        let n_steps = (config.final_time / limit).ceil() as u64;
        let dt = config.final_time / n_steps as f64;
        let err = cavity_error(&complex, &dual, &mode, dt, n_steps).map_err(|e| match e {
            ValidationError::Unstable { step, .. } => ValidationError::Unstable { spacing: h, step },
            e => e,
        })?;
        log::info!("h = {h:e}: dt = {dt:e}, {n_steps} steps, error {err:e}");
        report.resolutions.push(h);
        report.errors.push(err);
        report.time_steps.push(dt);
    }
    let lx: Vec<f64> = report.resolutions.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = report.errors.iter().map(|e| e.ln()).collect();
    report.observed_order = slope(&lx, &ly);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = [1.0f64, 0.5, 0.25].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [1.0f64, 0.25, 0.0625].iter().map(|v| (3.0 * v).ln()).collect();
        assert!((slope(&x, &y) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_steps_reproduce_the_initial_cochains() {
        let c = generate::quad_grid(6, 6, 1.0 / 6.0, 1.0 / 6.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        for pol in [Polarization::Te, Polarization::Tm] {
            let m = cavity_solution(pol, 1, 2, 1.0, 1.0, 1.0, 1.0);
            assert_eq!(cavity_error(&c, &d, &m, 0.05, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn quad_family_is_second_order_at_small_sizes() {
        let cfg = ConvergenceConfig {
            resolutions: vec![4, 8, 16],
            final_time: 0.5,
            ..ConvergenceConfig::default()
        };
        let r = convergence_study(&cfg).unwrap();
        assert!(r.resolutions.windows(2).all(|w| w[1] < w[0]));
        assert!(r.errors.iter().all(|&e| e > 0.0));
        assert!((r.observed_order - 2.0).abs() < 0.3, "{r:?}");
    }

    /// On squares the temporal and spatial dispersion errors have opposite
    /// signs and cancel near the CFL step, so at a fixed grid the error
    /// grows as dt shrinks, towards the purely spatial error.
    #[test]
    fn quad_error_grows_towards_the_spatial_limit_as_dt_shrinks() {
        let c = generate::quad_grid(8, 8, 0.125, 0.125);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let limit = cfl_dt(&c, &d, 1.0).unwrap();
        for pol in [Polarization::Te, Polarization::Tm] {
            let m = cavity_solution(pol, 1, 1, 1.0, 1.0, 1.0, 1.0);
            let errors: Vec<f64> = [0.99, 0.7, 0.4, 0.2, 0.1, 0.05]
                .iter()
                .map(|f| {
                    let n = (1.0 / (f * limit)).ceil() as u64;
                    cavity_error(&c, &d, &m, 1.0 / n as f64, n).unwrap()
                })
                .collect();
            assert!(errors.windows(2).all(|w| w[1] > 0.99 * w[0]), "{pol}: {errors:?}");
            assert!(errors[5] > 2.0 * errors[0]);
            let (a, b) = (errors[4], errors[5]);
            assert!((b - a) / b < 0.05, "{pol}: the spatial error dominates at small dt");
        }
    }

    #[test]
    fn rejects_bad_setups() {
        let base = ConvergenceConfig::default();
        for cfg in [
            ConvergenceConfig {
                resolutions: vec![8, 16],
                ..base.clone()
            },
            ConvergenceConfig {
                resolutions: vec![16, 8, 32],
                ..base.clone()
            },
            ConvergenceConfig {
                cfl_fraction: 1.2,
                ..base.clone()
            },
            ConvergenceConfig {
                mode: (0, 1),
                ..base.clone()
            },
        ] {
            assert!(matches!(convergence_study(&cfg), Err(ValidationError::InvalidSetup(_))));
        }
    }
}
