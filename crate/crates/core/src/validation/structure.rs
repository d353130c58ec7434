//! Gauge and variational identities on the prism lattice, and the embedding
//! of a leapfrog trajectory as a spacetime curvature.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ValidationError;
use crate::mesh::{build_dual, generate, DualMesh, DualMode, SimplicialSurface};
use crate::solver::{cfl_dt, divergence_free_edge_field, MaterialField, NoSource, Polarization, Solver};
use crate::spacetime::{
    build_prism, embed_te_trajectory, trajectory_residuals, PrismComplex, SpacetimeForm, TrajectoryResiduals,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationalReport {
    pub instances: usize,
    /// Max `|dF|` for `F = dA` with integer-valued `A` (exact arithmetic).
    pub bianchi_integer: f64,
    /// Max `|dF| / |F|` for `F = dA` with real-valued `A`.
    pub bianchi_relative: f64,
    /// Max of `|L(A + df, J) - L(A, J)|` over the sum of the absolute
    /// action terms.
    pub gauge_relative: f64,
    /// Max continuity residual of the random currents, relative to the
    /// largest term.
    pub continuity_relative: f64,
    /// Max relative difference between central differences of `L` and
    /// minus the source residual.
    pub gradient_relative: f64,
    pub gradient_edges: usize,
}

fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Sum of the absolute values of the field and coupling terms of `L`.
fn action_scale(prism: &PrismComplex, a: &SpacetimeForm, j: &SpacetimeForm) -> Result<f64, ValidationError> {
    let f = prism.curvature(a)?;
    let field: f64 = f
        .values
        .iter()
        .zip(prism.face_weights())
        .map(|(x, w)| (w * x * x).abs())
        .sum();
    let coupling: f64 = a
        .values
        .iter()
        .zip(&j.values)
        .zip(prism.edge_weights())
        .map(|((x, y), w)| (w * x * y).abs())
        .sum();
    Ok(0.5 * field + coupling)
}

/// Randomized checks of `dF = 0`, gauge invariance of the action under a
/// conserved current, and of the action gradient against the source
/// residual (by central differences on `gradient_edges` random edges of
/// the first instance).
pub fn variational_checks(
    instances: usize,
    gradient_edges: usize,
    seed: u64,
) -> Result<VariationalReport, ValidationError> {
    let base = generate::jittered_equilateral(4, 1.0, 0.25, seed);
    let dual = build_dual(&base, DualMode::Strict)?;
    let prism = build_prism(&base, &dual, 5, 0.7 * cfl_dt(&base, &dual, 1.0)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VariationalReport {
        instances,
        bianchi_integer: 0.0,
        bianchi_relative: 0.0,
        gauge_relative: 0.0,
        continuity_relative: 0.0,
        gradient_relative: 0.0,
        gradient_edges: 0,
    };
    let n_e = prism.n_edges();
    for instance in 0..instances {
        let ints: Vec<f64> = (0..n_e)
            .map(|_| rng.gen_range(-1_000_000i64..=1_000_000) as f64)
            .collect();
        let dfi = prism.bianchi_residual(&prism.curvature(&prism.form(1, ints)?)?)?;
        report.bianchi_integer = report.bianchi_integer.max(dfi.max_abs());

        let a = prism.form(1, random(n_e, &mut rng))?;
        let f = prism.curvature(&a)?;
        let df = prism.bianchi_residual(&f)?;
        report.bianchi_relative = report.bianchi_relative.max(df.max_abs() / f.max_abs());

        let j = prism.conserved_current(&random(prism.n_faces(), &mut rng))?;
        let weighted_j = j
            .values
            .iter()
            .zip(prism.edge_weights())
            .fold(0.0f64, |m, (x, w)| m.max((x * w).abs()));
        let cont = prism.continuity_residual(&j)?;
        report.continuity_relative = report.continuity_relative.max(cont.max_abs() / weighted_j);

        let gauge = prism.form(0, random(prism.n_vertices(), &mut rng))?;
        let a2 = prism.gauge_transform(&a, &gauge)?;
        let l1 = prism.lagrangian(&a, &j)?;
        let l2 = prism.lagrangian(&a2, &j)?;
        let scale = action_scale(&prism, &a, &j)?.max(action_scale(&prism, &a2, &j)?);
        report.gauge_relative = report.gauge_relative.max((l2 - l1).abs() / scale);

        if instance == 0 {
            let residual = prism.source_residual(&f, &j)?;
            let starred: Vec<f64> = f
                .values
                .iter()
                .zip(prism.face_weights())
                .map(|(x, w)| (w * x).abs())
                .collect();
            let inc = prism.incidence(1);
            let mut term_scale: Vec<f64> = j
                .values
                .iter()
                .zip(prism.edge_weights())
                .map(|(x, w)| (x * w).abs())
                .collect();
            for (face, row) in inc.rows().enumerate() {
                for &(e, _) in row {
                    term_scale[e] += starred[face];
                }
            }
            let h = 1e-6;
            let picked = sample(&mut rng, n_e, gradient_edges.min(n_e));
            for e in picked.iter() {
                let mut plus = a.clone();
                plus.values[e] += h;
                let mut minus = a.clone();
                minus.values[e] -= h;
                let fd = (prism.lagrangian(&plus, &j)? - prism.lagrangian(&minus, &j)?) / (2.0 * h);
                let exact = -residual.values[e];
                let rel = (fd - exact).abs() / exact.abs().max(term_scale[e]);
                report.gradient_relative = report.gradient_relative.max(rel);
                report.gradient_edges += 1;
            }
        }
    }
    Ok(report)
}

/// Embeds `n_slices` consecutive states of a source-free vacuum TE run,
/// started from divergence-free random data at `cfl_fraction * cfl_dt`,
/// into the prism lattice over `complex` and returns its residuals.
pub fn embedded_trajectory_check(
    complex: &SimplicialSurface,
    dual: &DualMesh,
    n_slices: usize,
    cfl_fraction: f64,
    seed: u64,
) -> Result<TrajectoryResiduals, ValidationError> {
    let materials = MaterialField::vacuum(complex, Polarization::Te);
    let dt = cfl_fraction * cfl_dt(complex, dual, 1.0)?;
    let solver = Solver::new(complex, dual, &materials, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = random(complex.n_faces(), &mut rng);
    let edge = divergence_free_edge_field(complex, dual, &materials, &psi);
    let mut state = solver.state(edge, random(complex.n_faces(), &mut rng))?;
    let mut states = Vec::with_capacity(n_slices);
    for s in 0..n_slices {
        if s > 0 {
            solver.step(&mut state, &NoSource)?;
        }
        states.push(state.clone());
    }
    let prism = build_prism(complex, dual, n_slices, dt)?;
    let f = embed_te_trajectory(&states, &prism, 1.0, 1.0)?;
    Ok(trajectory_residuals(&prism, &f)?)
}
