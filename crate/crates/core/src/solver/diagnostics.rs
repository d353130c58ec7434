use super::{MaterialField, Polarization, SimState, Solver};
use crate::mesh::{DualMesh, SimplicialSurface};

/// Discrete field energy `1/2 sum m_e u_e^2 |e| |*e| + 1/2 sum m_f w_f^2 |P|`
/// with the edge and face fields taken as they are stored (half a step
/// apart), so it oscillates slightly even when nothing is lost.
pub fn energy(state: &SimState, materials: &MaterialField, dual: &DualMesh) -> f64 {
    let me = materials.edge_inertia();
    let mf = materials.face_inertia();
    let edge: f64 = state
        .edge_field
        .iter()
        .enumerate()
        .map(|(e, u)| me[e] * u * u * dual.edge_lengths[e] * dual.dual_edge_lengths[e])
        .sum();
    let face: f64 = state
        .face_field
        .iter()
        .enumerate()
        .map(|(f, w)| mf[f] * w * w * dual.face_areas[f])
        .sum();
    0.5 * (edge + face)
}

/// The quadratic form leapfrog conserves exactly in a lossless, source-free
/// run: `1/2 sum W_e u^(n-1/2) u^(n+1/2) + 1/2 sum W_f (w^n)^2`, where the
/// edge field half a step ahead is obtained from one source-free update.
/// Under loss it is what decays.
pub fn leapfrog_energy(state: &SimState, solver: &Solver) -> f64 {
    let mut ahead = state.edge_field.clone();
    solver.update_edges(&mut ahead, &state.face_field, None);
    let edge: f64 = state
        .edge_field
        .iter()
        .zip(&ahead)
        .zip(&solver.edge_weight)
        .map(|((a, b), w)| w * a * b)
        .sum();
    let face: f64 = state
        .face_field
        .iter()
        .zip(&solver.face_weight)
        .map(|(h, w)| w * h * h)
        .sum();
    0.5 * (edge + face)
}

/// Charge per dual cell (per vertex) carried off by conduction and source
/// currents since the start of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargeHistory {
    pub charge: Vec<f64>,
}

impl ChargeHistory {
    pub fn new(n_vertices: usize) -> Self {
        Self {
            charge: vec![0.0; n_vertices],
        }
    }

    /// Starts from the charge implied by `state`, so that only changes
    /// after this point count as residual.
    pub fn consistent_with(state: &SimState, solver: &Solver) -> Self {
        Self {
            charge: dual_divergence(state, solver),
        }
    }

    /// Accounts for one edge half-update from `before` to `after`.
    pub(crate) fn record(&mut self, solver: &Solver, before: &[f64], after: &[f64], current: Option<&[f64]>) {
        let dt = solver.dt();
        let te = solver.polarization() == Polarization::Te;
        let outflow: Vec<f64> = (0..before.len())
            .map(|e| {
                if te && solver.boundary_edge[e] {
                    return 0.0;
                }
                let mut j = solver.edge_loss[e] * 0.5 * (before[e] + after[e]);
                if let Some(c) = current {
                    j += c[e];
                }
                solver.dual_edge_lengths[e] * j
            })
            .collect();
        let div = solver.boundary1.apply_transpose(&outflow);
        for (q, d) in self.charge.iter_mut().zip(div) {
            *q -= dt * d;
        }
    }
}

/// Net flux of the edge field into each dual cell.
fn dual_divergence(state: &SimState, solver: &Solver) -> Vec<f64> {
    let flux: Vec<f64> = state
        .edge_field
        .iter()
        .zip(&solver.flux_weight)
        .map(|(u, w)| u * w)
        .collect();
    solver.boundary1.apply_transpose(&flux)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceResiduals {
    pub magnetic: f64,
    pub electric: f64,
    /// Max-norm of the edge flux `m |*e| u`, the natural scale of both.
    pub flux_scale: f64,
}

impl DivergenceResiduals {
    pub fn max(&self) -> f64 {
        self.magnetic.max(self.electric)
    }

    /// Largest residual relative to `flux_scale` (0 for a zero field).
    pub fn relative(&self) -> f64 {
        if self.flux_scale == 0.0 {
            self.max()
        } else {
            self.max() / self.flux_scale
        }
    }
}

/// Max-norm Gauss-law residuals on the dual cells.
///
/// Only the in-plane field has a divergence: E in TE (the electric law) and H
/// in TM (the magnetic law); the normal component's law holds identically.
/// In TE the perfectly conducting wall carries surface charge, so boundary
/// vertices are excluded there.
pub fn divergence_residuals(state: &SimState, solver: &Solver, charges: &ChargeHistory) -> DivergenceResiduals {
    let div = dual_divergence(state, solver);
    let te = state.polarization == Polarization::Te;
    let residual = div
        .iter()
        .zip(&charges.charge)
        .enumerate()
        .filter(|&(v, _)| !(te && solver.boundary_vertex[v]))
        .map(|(_, (d, q))| (d - q).abs())
        .fold(0.0, f64::max);
    let flux_scale = state
        .edge_field
        .iter()
        .zip(&solver.flux_weight)
        .map(|(u, w)| (u * w).abs())
        .fold(0.0, f64::max);
    match state.polarization {
        Polarization::Te => DivergenceResiduals {
            magnetic: 0.0,
            electric: residual,
            flux_scale,
        },
        Polarization::Tm => DivergenceResiduals {
            magnetic: residual,
            electric: 0.0,
            flux_scale,
        },
    }
}

/// Edge field whose flux is the dual coboundary of a face potential, hence
/// divergence-free: `u_e = (d^T psi)_e / (m_e |*e|)`. Boundary edges are
/// zeroed in TE to respect the conducting wall.
pub fn divergence_free_edge_field(
    complex: &SimplicialSurface,
    dual: &DualMesh,
    materials: &MaterialField,
    potential: &[f64],
) -> Vec<f64> {
    let curl = complex.boundary2().apply_transpose(potential);
    let m = materials.edge_inertia();
    let te = materials.polarization() == Polarization::Te;
    curl.iter()
        .enumerate()
        .map(|(e, c)| {
            if te && complex.is_boundary_edge(e) {
                0.0
            } else {
                c / (m[e] * dual.dual_edge_lengths[e])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_dual, generate, DualMode};
    use crate::solver::{GaussianPulse, NoSource, SourceSpec, SourceTarget};

    #[test]
    fn single_edge_energy() {
        let c = generate::quad_grid(1, 1, 2.0, 2.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let m = MaterialField::vacuum(&c, Polarization::Te);
        let mut st = SimState::zeros(Polarization::Te, 4, 1, 0.1);
        assert_eq!(energy(&st, &m, &d), 0.0);
        st.edge_field[0] = 1.0;
        assert!((energy(&st, &m, &d) - 1.0).abs() < 1e-15);
        st.face_field[0] = 0.3;
        let e1 = energy(&st, &m, &d);
        st.edge_field[0] = 2.0;
        st.face_field[0] = 0.6;
        assert!((energy(&st, &m, &d) - 4.0 * e1).abs() < 1e-14);
    }

    #[test]
    fn modified_energy_is_conserved_to_round_off() {
        let c = generate::icosphere(1, 1.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let m = MaterialField::vacuum(&c, Polarization::Tm);
        let s = Solver::new(&c, &d, &m, 0.05).unwrap();
        let mut st = s.zero_state();
        st.face_field = (0..c.n_faces()).map(|f| ((f * 7) % 5) as f64 - 2.0).collect();
        let q0 = leapfrog_energy(&st, &s);
        for _ in 0..500 {
            s.step(&mut st, &NoSource).unwrap();
            assert!((leapfrog_energy(&st, &s) - q0).abs() < 1e-12 * q0);
        }
    }

    #[test]
    fn divergence_free_data_stays_divergence_free() {
        let c = generate::quad_grid(6, 6, 1.0 / 6.0, 1.0 / 6.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        for pol in [Polarization::Te, Polarization::Tm] {
            let m = MaterialField::vacuum(&c, pol);
            let s = Solver::new(&c, &d, &m, 0.05).unwrap();
            let psi: Vec<f64> = (0..c.n_faces()).map(|f| (f as f64 * 0.37).cos()).collect();
            let mut st = s
                .state(divergence_free_edge_field(&c, &d, &m, &psi), vec![0.0; c.n_faces()])
                .unwrap();
            let mut q = ChargeHistory::new(c.n_vertices());
            for _ in 0..200 {
                s.step_tracking(&mut st, &NoSource, &mut q).unwrap();
                let r = divergence_residuals(&st, &s, &q);
                assert!(r.relative() < 1e-13, "{pol}: {r:?}");
            }
        }
    }

    #[test]
    fn conduction_and_sources_move_tracked_charge() {
        let c = generate::icosphere(1, 1.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let m = MaterialField::uniform(&c, Polarization::Te, 1.0, 1.0, 0.7, 0.0).unwrap();
        let s = Solver::new(&c, &d, &m, 0.05).unwrap();
        let src = SourceSpec::new(
            vec![GaussianPulse::new(3, SourceTarget::Electric, 1.0, 0.5, 0.1).unwrap()],
            Polarization::Te,
            c.n_edges(),
            c.n_faces(),
        )
        .unwrap();
        let mut st = s.zero_state();
        let mut q = ChargeHistory::new(c.n_vertices());
        for _ in 0..40 {
            s.step_tracking(&mut st, &src, &mut q).unwrap();
        }
        assert!(q.charge.iter().any(|x| x.abs() > 1e-3));
        let r = divergence_residuals(&st, &s, &q);
        assert!(r.relative() < 1e-12, "{r:?}");
        // ignoring the charge exposes the violation
        let r = divergence_residuals(&st, &s, &ChargeHistory::new(c.n_vertices()));
        assert!(r.relative() > 1e-3);
    }

    #[test]
    fn zero_state_has_zero_residual() {
        let c = generate::quad_grid(2, 2, 1.0, 1.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let m = MaterialField::vacuum(&c, Polarization::Te);
        let s = Solver::new(&c, &d, &m, 0.1).unwrap();
        let r = divergence_residuals(&s.zero_state(), &s, &ChargeHistory::new(c.n_vertices()));
        assert_eq!((r.magnetic, r.electric), (0.0, 0.0));
    }
}
