use super::diagnostics::ChargeHistory;
use super::{CurrentSource, MaterialField, Polarization, SimState, SolverError};
use crate::mesh::{DualMesh, Incidence, SimplicialSurface};

/// Explicit update coefficients of one leapfrog step.
///
/// Each half-update has the closed form
/// `new = decay * old + sum(coupling * other) + drive * current`
/// where, for inertia `m` and conductivity `s`,
/// `decay = (m/dt - s/2) / (m/dt + s/2)` and `drive = -1 / (m/dt + s/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateCoefficients {
    pub polarization: Polarization,
    pub dt: f64,
    pub edge_decay: Vec<f64>,
    pub edge_drive: Vec<f64>,
    /// Per edge: `(face, coefficient)` of the adjacent face values.
    pub edge_coupling: Vec<Vec<(usize, f64)>>,
    pub face_decay: Vec<f64>,
    pub face_drive: Vec<f64>,
    /// Per face: `(edge, coefficient)` of the boundary edge values.
    pub face_coupling: Vec<Vec<(usize, f64)>>,
}

fn decay_and_gain(inertia: f64, loss: f64, dt: f64) -> (f64, f64) {
    let a = inertia / dt;
    let denom = a + 0.5 * loss;
    ((a - 0.5 * loss) / denom, 1.0 / denom)
}

impl UpdateCoefficients {
    pub fn assemble(
        complex: &SimplicialSurface,
        dual: &DualMesh,
        materials: &MaterialField,
        dt: f64,
    ) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::InvalidTimeStep(dt));
        }
        let polarization = materials.polarization();
        // TE: eps dE/dt = +d^T H / |*e|, mu dH/dt = -curl E / |P|
        // TM: mu dH/dt = -d^T E / |*e|, eps dE/dt = +curl H / |P|
        let (edge_sign, face_sign) = match polarization {
            Polarization::Te => (1.0, -1.0),
            Polarization::Tm => (-1.0, 1.0),
        };
        let n_e = complex.n_edges();
        let n_f = complex.n_faces();
        if materials.edge_inertia().len() != n_e || materials.face_inertia().len() != n_f {
            return Err(SolverError::LengthMismatch {
                what: "materials",
                expected: n_e + n_f,
                found: materials.edge_inertia().len() + materials.face_inertia().len(),
            });
        }

        let mut edge_decay = Vec::with_capacity(n_e);
        let mut edge_drive = Vec::with_capacity(n_e);
        let mut edge_coupling = Vec::with_capacity(n_e);
        for e in 0..n_e {
            let star = dual.dual_edge_lengths[e];
            if star == 0.0 || !star.is_finite() {
                return Err(SolverError::NonPositiveDualLength { edge: e, length: star });
            }
            if polarization == Polarization::Te && complex.is_boundary_edge(e) {
                // perfect conductor: tangential E pinned to zero
                edge_decay.push(0.0);
                edge_drive.push(0.0);
                edge_coupling.push(Vec::new());
                continue;
            }
            let (decay, gain) = decay_and_gain(materials.edge_inertia()[e], materials.edge_loss()[e], dt);
            edge_decay.push(decay);
            edge_drive.push(-gain);
            edge_coupling.push(
                complex
                    .edge_faces(e)
                    .iter()
                    .map(|&(f, s)| (f, edge_sign * gain * f64::from(s) / star))
                    .collect(),
            );
        }

        let mut face_decay = Vec::with_capacity(n_f);
        let mut face_drive = Vec::with_capacity(n_f);
        let mut face_coupling = Vec::with_capacity(n_f);
        for (f, face) in complex.faces().iter().enumerate() {
            let (decay, gain) = decay_and_gain(materials.face_inertia()[f], materials.face_loss()[f], dt);
            let area = dual.face_areas[f];
            face_decay.push(decay);
            face_drive.push(-gain);
            face_coupling.push(
                face.edges
                    .iter()
                    .map(|&(e, s)| (e, face_sign * gain * f64::from(s) * dual.edge_lengths[e] / area))
                    .collect(),
            );
        }

        Ok(Self {
            polarization,
            dt,
            edge_decay,
            edge_drive,
            edge_coupling,
            face_decay,
            face_drive,
            face_coupling,
        })
    }
}

/// A leapfrog integrator for one mesh, material set and time step.
///
/// Besides the update coefficients it keeps the quadratic weights needed by
/// the energy and divergence diagnostics.
#[derive(Clone, Debug)]
pub struct Solver {
    coefficients: UpdateCoefficients,
    pub(crate) boundary1: Incidence,
    pub(crate) boundary_edge: Vec<bool>,
    pub(crate) boundary_vertex: Vec<bool>,
    /// `m_e |e| |*e|`
    pub(crate) edge_weight: Vec<f64>,
    /// `m_f |P|`
    pub(crate) face_weight: Vec<f64>,
    /// `m_e |*e|`: maps the edge field to its flux through the dual edge
    pub(crate) flux_weight: Vec<f64>,
    pub(crate) dual_edge_lengths: Vec<f64>,
    pub(crate) edge_loss: Vec<f64>,
}

impl Solver {
    pub fn new(
        complex: &SimplicialSurface,
        dual: &DualMesh,
        materials: &MaterialField,
        dt: f64,
    ) -> Result<Self, SolverError> {
        let coefficients = UpdateCoefficients::assemble(complex, dual, materials, dt)?;
        let n_e = complex.n_edges();
        let me = materials.edge_inertia();
        let mf = materials.face_inertia();
        Ok(Self {
            coefficients,
            boundary1: complex.boundary1().clone(),
            boundary_edge: (0..n_e).map(|e| complex.is_boundary_edge(e)).collect(),
            boundary_vertex: (0..complex.n_vertices())
                .map(|v| complex.is_boundary_vertex(v))
                .collect(),
            edge_weight: (0..n_e)
                .map(|e| me[e] * dual.edge_lengths[e] * dual.dual_edge_lengths[e])
                .collect(),
            face_weight: (0..complex.n_faces()).map(|f| mf[f] * dual.face_areas[f]).collect(),
            flux_weight: (0..n_e).map(|e| me[e] * dual.dual_edge_lengths[e]).collect(),
            dual_edge_lengths: dual.dual_edge_lengths.clone(),
            edge_loss: materials.edge_loss().to_vec(),
        })
    }

    pub fn coefficients(&self) -> &UpdateCoefficients {
        &self.coefficients
    }

    pub fn polarization(&self) -> Polarization {
        self.coefficients.polarization
    }

    pub fn dt(&self) -> f64 {
        self.coefficients.dt
    }

    pub fn n_edges(&self) -> usize {
        self.coefficients.edge_decay.len()
    }

    pub fn n_faces(&self) -> usize {
        self.coefficients.face_decay.len()
    }

    pub fn zero_state(&self) -> SimState {
        SimState::zeros(self.polarization(), self.n_edges(), self.n_faces(), self.dt())
    }

    /// Builds a state at step 0 from explicit fields.
    pub fn state(&self, edge_field: Vec<f64>, face_field: Vec<f64>) -> Result<SimState, SolverError> {
        let state = SimState {
            polarization: self.polarization(),
            edge_field,
            face_field,
            step: 0,
            dt: self.dt(),
        };
        self.check(&state)?;
        Ok(state)
    }

    pub fn check(&self, state: &SimState) -> Result<(), SolverError> {
        if state.polarization != self.polarization() {
            return Err(SolverError::PolarizationMismatch {
                expected: self.polarization(),
                found: state.polarization,
            });
        }
        if state.dt != self.dt() {
            return Err(SolverError::StaggeringMismatch {
                expected: self.dt(),
                found: state.dt,
            });
        }
        for (what, found, expected) in [
            ("edge field", state.edge_field.len(), self.n_edges()),
            ("face field", state.face_field.len(), self.n_faces()),
        ] {
            if found != expected {
                return Err(SolverError::LengthMismatch { what, expected, found });
            }
        }
        Ok(())
    }

    /// Edge half-update from `(step - 1/2)` to `(step + 1/2)`, with the edge
    /// current sampled at `step * dt`.
    pub fn update_edges(&self, edge: &mut [f64], face: &[f64], current: Option<&[f64]>) {
        let c = &self.coefficients;
        for e in 0..edge.len() {
            let mut v = c.edge_decay[e] * edge[e];
            for &(f, k) in &c.edge_coupling[e] {
                v += k * face[f];
            }
            if let Some(j) = current {
                v += c.edge_drive[e] * j[e];
            }
            edge[e] = v;
        }
    }

    /// Face half-update from `step` to `step + 1`, with the face current
    /// sampled at `(step + 1/2) * dt`.
    pub fn update_faces(&self, face: &mut [f64], edge: &[f64], current: Option<&[f64]>) {
        let c = &self.coefficients;
        for f in 0..face.len() {
            let mut v = c.face_decay[f] * face[f];
            for &(e, k) in &c.face_coupling[f] {
                v += k * edge[e];
            }
            if let Some(j) = current {
                v += c.face_drive[f] * j[f];
            }
            face[f] = v;
        }
    }

    fn currents(&self, state: &SimState, sources: &dyn CurrentSource) -> Option<(Vec<f64>, Vec<f64>)> {
        if sources.is_silent() {
            return None;
        }
        let pol = self.polarization();
        let mut je = vec![0.0; self.n_edges()];
        let mut jf = vec![0.0; self.n_faces()];
        sources.add_edge_current(pol, state.face_time(), &mut je);
        sources.add_face_current(pol, state.face_time() + 0.5 * self.dt(), &mut jf);
        Some((je, jf))
    }

    /// One full leapfrog step in place.
    pub fn step(&self, state: &mut SimState, sources: &dyn CurrentSource) -> Result<(), SolverError> {
        self.check(state)?;
        let currents = self.currents(state, sources);
        let (je, jf) = match &currents {
            Some((je, jf)) => (Some(je.as_slice()), Some(jf.as_slice())),
            None => (None, None),
        };
        self.update_edges(&mut state.edge_field, &state.face_field, je);
        self.update_faces(&mut state.face_field, &state.edge_field, jf);
        state.step += 1;
        if !state.is_finite() {
            return Err(SolverError::NonFinite { step: state.step });
        }
        Ok(())
    }

    /// [`Solver::step`] that also accumulates the charge moved by
    /// conduction and source currents.
    pub fn step_tracking(
        &self,
        state: &mut SimState,
        sources: &dyn CurrentSource,
        charges: &mut ChargeHistory,
    ) -> Result<(), SolverError> {
        self.check(state)?;
        let currents = self.currents(state, sources);
        let je = currents.as_ref().map(|(je, _)| je.as_slice());
        let before = state.edge_field.clone();
        self.update_edges(&mut state.edge_field, &state.face_field, je);
        charges.record(self, &before, &state.edge_field, je);
        self.update_faces(
            &mut state.face_field,
            &state.edge_field,
            currents.as_ref().map(|(_, jf)| jf.as_slice()),
        );
        state.step += 1;
        if !state.is_finite() {
            return Err(SolverError::NonFinite { step: state.step });
        }
        Ok(())
    }

    /// Inverts one source-free step: recovers the state at `step - 1`.
    pub fn reverse_step(&self, state: &mut SimState) -> Result<(), SolverError> {
        self.check(state)?;
        let c = &self.coefficients;
        for f in 0..state.face_field.len() {
            let mut v = state.face_field[f];
            for &(e, k) in &c.face_coupling[f] {
                v -= k * state.edge_field[e];
            }
            state.face_field[f] = v / c.face_decay[f];
        }
        for e in 0..state.edge_field.len() {
            if c.edge_decay[e] == 0.0 {
                state.edge_field[e] = 0.0;
                continue;
            }
            let mut v = state.edge_field[e];
            for &(f, k) in &c.edge_coupling[e] {
                v -= k * state.face_field[f];
            }
            state.edge_field[e] = v / c.edge_decay[e];
        }
        state.step = state.step.saturating_sub(1);
        if !state.is_finite() {
            return Err(SolverError::NonFinite { step: state.step });
        }
        Ok(())
    }
}

fn step_polarized(
    expected: Polarization,
    state: &SimState,
    solver: &Solver,
    sources: &dyn CurrentSource,
) -> Result<SimState, SolverError> {
    if state.polarization != expected {
        return Err(SolverError::PolarizationMismatch {
            expected,
            found: state.polarization,
        });
    }
    let mut next = state.clone();
    solver.step(&mut next, sources)?;
    Ok(next)
}

/// One TE step: E from `n - 1/2` to `n + 1/2`, then H from `n` to `n + 1`.
pub fn te_step(state: &SimState, solver: &Solver, sources: &dyn CurrentSource) -> Result<SimState, SolverError> {
    step_polarized(Polarization::Te, state, solver, sources)
}

/// One TM step: H from `n - 1/2` to `n + 1/2`, then E from `n` to `n + 1`.
pub fn tm_step(state: &SimState, solver: &Solver, sources: &dyn CurrentSource) -> Result<SimState, SolverError> {
    step_polarized(Polarization::Tm, state, solver, sources)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_complex, build_dual, generate, DualMode, Point3};
    use crate::solver::{GaussianPulse, NoSource, SourceSpec, SourceTarget};

    fn setup(c: &SimplicialSurface, pol: Polarization, dt: f64) -> (DualMesh, Solver) {
        let d = build_dual(c, DualMode::Strict).unwrap();
        let m = MaterialField::vacuum(c, pol);
        let s = Solver::new(c, &d, &m, dt).unwrap();
        (d, s)
    }

    #[test]
    fn zero_stays_zero() {
        let c = generate::icosphere(1, 1.0);
        for pol in [Polarization::Te, Polarization::Tm] {
            let (_, s) = setup(&c, pol, 0.01);
            let z = s.zero_state();
            let next = match pol {
                Polarization::Te => te_step(&z, &s, &NoSource).unwrap(),
                Polarization::Tm => tm_step(&z, &s, &NoSource).unwrap(),
            };
            assert!(next.edge_field.iter().chain(&next.face_field).all(|&v| v == 0.0));
            assert_eq!(next.step, 1);
        }
    }

    #[test]
    fn equilateral_face_update_from_circulating_field() {
        let (a, dt) = (0.7, 0.05);
        let s3 = 3f64.sqrt();
        let c = build_complex(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(a, 0.0, 0.0),
                Point3::new(0.5 * a, 0.5 * s3 * a, 0.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let (_, s) = setup(&c, Polarization::Te, dt);
        let mut e = vec![0.0; 3];
        for &(edge, sign) in &c.faces()[0].edges {
            e[edge] = f64::from(sign);
        }
        let mut h = vec![0.0];
        s.update_faces(&mut h, &e, None);
        let expected = -dt * 3.0 * a / (s3 * a * a / 4.0);
        assert!((h[0] - expected).abs() < 1e-13 * expected.abs());
    }

    #[test]
    fn tm_edge_update_from_face_difference() {
        let dt = 0.02;
        let c = generate::equilateral_patch(2, 1.0);
        let (d, s) = setup(&c, Polarization::Tm, dt);
        let e = (0..c.n_edges()).find(|&e| !c.is_boundary_edge(e)).unwrap();
        let faces = c.edge_faces(e);
        let plus = faces.iter().find(|&&(_, s)| s > 0).unwrap().0;
        let mut ez = vec![0.0; c.n_faces()];
        ez[plus] = 1.0;
        let mut h = vec![0.0; c.n_edges()];
        s.update_edges(&mut h, &ez, None);
        let expected = -dt * 1.0 / d.dual_edge_lengths[e];
        assert!((h[e] - expected).abs() < 1e-14 * expected.abs());
    }

    #[test]
    fn pec_keeps_boundary_edges_at_zero() {
        let c = generate::quad_grid(4, 4, 0.25, 0.25);
        let (_, s) = setup(&c, Polarization::Te, 0.1);
        let mut st = s.zero_state();
        st.face_field = (0..c.n_faces()).map(|f| (f as f64).sin()).collect();
        for _ in 0..10 {
            s.step(&mut st, &NoSource).unwrap();
        }
        for &e in c.boundary_edges() {
            assert_eq!(st.edge_field[e], 0.0);
        }
    }

    #[test]
    fn stepping_is_linear_and_reversible() {
        let c = generate::icosphere(1, 1.0);
        for pol in [Polarization::Te, Polarization::Tm] {
            let (_, s) = setup(&c, pol, 0.05);
            let mut x = s.zero_state();
            x.edge_field = (0..c.n_edges()).map(|e| ((e * 37 % 11) as f64 - 5.0) / 7.0).collect();
            x.face_field = (0..c.n_faces()).map(|f| ((f * 13 % 7) as f64 - 3.0) / 5.0).collect();
            let initial = x.clone();
            let mut y = x.clone();
            y.edge_field
                .iter_mut()
                .chain(y.face_field.iter_mut())
                .for_each(|v| *v *= -2.5);
            s.step(&mut x, &NoSource).unwrap();
            s.step(&mut y, &NoSource).unwrap();
            let scale = y.max_abs();
            for (a, b) in x
                .edge_field
                .iter()
                .chain(&x.face_field)
                .zip(y.edge_field.iter().chain(&y.face_field))
            {
                assert!((b + 2.5 * a).abs() <= 1e-13 * scale);
            }
            for _ in 0..49 {
                s.step(&mut x, &NoSource).unwrap();
            }
            for _ in 0..50 {
                s.reverse_step(&mut x).unwrap();
            }
            assert_eq!(x.step, 0);
            let scale = initial.max_abs();
            for (a, b) in x
                .edge_field
                .iter()
                .chain(&x.face_field)
                .zip(initial.edge_field.iter().chain(&initial.face_field))
            {
                assert!((a - b).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn lossy_coefficients_and_source_sign() {
        let c = generate::quad_grid(2, 2, 1.0, 1.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let m = MaterialField::uniform(&c, Polarization::Tm, 2.0, 1.0, 0.5, 0.0).unwrap();
        let s = Solver::new(&c, &d, &m, 0.1).unwrap();
        let k = s.coefficients();
        let (a, sig) = (2.0 / 0.1, 0.5);
        assert!((k.face_decay[0] - (a - sig / 2.0) / (a + sig / 2.0)).abs() < 1e-15);
        assert!((k.face_drive[0] + 1.0 / (a + sig / 2.0)).abs() < 1e-15);
        // a positive electric current lowers E
        let src = SourceSpec::new(
            vec![GaussianPulse::new(1, SourceTarget::Electric, 1.0, 0.05, 1.0).unwrap()],
            Polarization::Tm,
            c.n_edges(),
            c.n_faces(),
        )
        .unwrap();
        let mut st = s.zero_state();
        s.step(&mut st, &src).unwrap();
        assert!(st.face_field[1] < 0.0);
    }

    #[test]
    fn mismatched_states_are_rejected() {
        let c = generate::quad_grid(2, 2, 1.0, 1.0);
        let (_, s) = setup(&c, Polarization::Te, 0.1);
        let mut st = s.zero_state();
        st.dt = 0.2;
        assert!(matches!(
            s.step(&mut st, &NoSource),
            Err(SolverError::StaggeringMismatch { .. })
        ));
        let st = SimState::zeros(Polarization::Tm, c.n_edges(), c.n_faces(), 0.1);
        assert!(matches!(
            te_step(&st, &s, &NoSource),
            Err(SolverError::PolarizationMismatch { .. })
        ));
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let m = MaterialField::vacuum(&c, Polarization::Te);
        assert!(Solver::new(&c, &d, &m, -1.0).is_err());
    }

    #[test]
    fn blow_up_reports_step() {
        let c = generate::quad_grid(4, 4, 0.25, 0.25);
        let (_, s) = setup(&c, Polarization::Tm, 10.0);
        let mut st = s.zero_state();
        st.face_field[5] = 1e300;
        let mut err = None;
        for _ in 0..100 {
            if let Err(e) = s.step(&mut st, &NoSource) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(err, Some(SolverError::NonFinite { .. })));
    }
}
