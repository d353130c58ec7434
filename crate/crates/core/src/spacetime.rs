//! The 2+1 dimensional prism lattice: a spatial surface times uniform time
//! slices, with Lorentz-signed diagonal Hodge weights.
//!
//! Cell ids, for `V`, `E`, `P` base vertices, edges and faces and `S`
//! slices:
//!
//! * vertex `(v, s)` is `s V + v`;
//! * spatial edge `(e, s)` is `s E + e`, temporal edge `(v, k)` from slice
//!   `k` to `k + 1` is `S E + k V + v`;
//! * spatial face `(f, s)` is `s P + f`, side quad `(e, k)` swept by edge
//!   `e` over interval `k` is `S P + k E + e`;
//! * prism `(f, k)` is `k P + f`.
//!
//! Time runs with `c = 1`. A cell whose dual reaches across time intervals
//! is weighted positively, one that contains the time direction negatively
//! (the metric on time is minus the length square).

use thiserror::Error;

use crate::mesh::{DualMesh, Incidence, SimplicialSurface};
use crate::solver::{Polarization, SimState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpacetimeError {
    #[error("a prism lattice needs at least 2 slices, got {0}")]
    TooFewSlices(usize),
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("dual mesh does not match the base surface")]
    DualMismatch,
    #[error("expected a {expected}-form, got a {found}-form")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("form has {found} values, lattice has {expected} cells")]
    LengthMismatch { expected: usize, found: usize },
    #[error("history has {found} states, lattice has {expected} slices")]
    SliceMismatch { expected: usize, found: usize },
    #[error("history state {index} does not fit the lattice: {reason}")]
    IncompatibleState { index: usize, reason: String },
    #[error("base dual length {length:e} of edge {edge} is not positive")]
    NonPositiveDual { edge: usize, length: f64 },
}

/// A cochain on the prism lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeForm {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl SpacetimeForm {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug)]
pub struct PrismComplex {
    base: SimplicialSurface,
    dual: DualMesh,
    n_slices: usize,
    dt: f64,
    /// `[edges on vertices, faces on edges, prisms on faces]`
    incidence: [Incidence; 3],
    edge_weights: Vec<f64>,
    face_weights: Vec<f64>,
}

pub fn build_prism(
    base: &SimplicialSurface,
    dual: &DualMesh,
    n_slices: usize,
    dt: f64,
) -> Result<PrismComplex, SpacetimeError> {
    if n_slices < 2 {
        return Err(SpacetimeError::TooFewSlices(n_slices));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SpacetimeError::InvalidTimeStep(dt));
    }
    if dual.edge_lengths.len() != base.n_edges()
        || dual.face_areas.len() != base.n_faces()
        || dual.dual_vertex_areas.len() != base.n_vertices()
    {
        return Err(SpacetimeError::DualMismatch);
    }
    if let Some(edge) = dual.dual_edge_lengths.iter().position(|&l| !(l > 0.0)) {
        return Err(SpacetimeError::NonPositiveDual {
            edge,
            length: dual.dual_edge_lengths[edge],
        });
    }
    let mut prism = PrismComplex {
        base: base.clone(),
        dual: dual.clone(),
        n_slices,
        dt,
        incidence: [
            Incidence::new(0, vec![]),
            Incidence::new(0, vec![]),
            Incidence::new(0, vec![]),
        ],
        edge_weights: Vec::new(),
        face_weights: Vec::new(),
    };
    prism.assemble();
    Ok(prism)
}

impl PrismComplex {
    fn assemble(&mut self) {
        let (nv, ne, nf, ns) = (
            self.base.n_vertices(),
            self.base.n_edges(),
            self.base.n_faces(),
            self.n_slices,
        );

        let mut edges = Vec::with_capacity(self.n_edges());
        for s in 0..ns {
            for edge in self.base.edges() {
                edges.push(vec![(self.vertex(edge.tail, s), -1), (self.vertex(edge.head, s), 1)]);
            }
        }
        for k in 0..ns - 1 {
            for v in 0..nv {
                edges.push(vec![(self.vertex(v, k), -1), (self.vertex(v, k + 1), 1)]);
            }
        }

        let mut faces = Vec::with_capacity(self.n_faces());
        for s in 0..ns {
            for face in self.base.faces() {
                faces.push(
                    face.edges
                        .iter()
                        .map(|&(e, sg)| (self.spatial_edge(e, s), sg))
                        .collect(),
                );
            }
        }
        for k in 0..ns - 1 {
            for (e, edge) in self.base.edges().iter().enumerate() {
                faces.push(vec![
                    (self.spatial_edge(e, k), 1),
                    (self.temporal_edge(edge.head, k), 1),
                    (self.spatial_edge(e, k + 1), -1),
                    (self.temporal_edge(edge.tail, k), -1),
                ]);
            }
        }

        let mut prisms = Vec::with_capacity(self.n_prisms());
        for k in 0..ns - 1 {
            for (f, face) in self.base.faces().iter().enumerate() {
                let mut row: Vec<(usize, i8)> = face.edges.iter().map(|&(e, sg)| (self.side_face(e, k), sg)).collect();
                row.push((self.spatial_face(f, k + 1), 1));
                row.push((self.spatial_face(f, k), -1));
                prisms.push(row);
            }
        }

        self.incidence = [
            Incidence::new(self.n_vertices(), edges),
            Incidence::new(self.n_edges(), faces),
            Incidence::new(self.n_faces(), prisms),
        ];

        let dt = self.dt;
        let d = &self.dual;
        let tau = |s: usize| if s == 0 || s == ns - 1 { 0.5 * dt } else { dt };
        let mut ew = Vec::with_capacity(self.n_edges());
        for s in 0..ns {
            for e in 0..ne {
                ew.push(d.dual_edge_lengths[e] * tau(s) / d.edge_lengths[e]);
            }
        }
        for _ in 0..ns - 1 {
            for v in 0..nv {
                ew.push(-d.dual_vertex_areas[v] / dt);
            }
        }
        let mut fw = Vec::with_capacity(self.n_faces());
        for s in 0..ns {
            for f in 0..nf {
                fw.push(tau(s) / d.face_areas[f]);
            }
        }
        for _ in 0..ns - 1 {
            for e in 0..ne {
                fw.push(-d.dual_edge_lengths[e] / (d.edge_lengths[e] * dt));
            }
        }
        self.edge_weights = ew;
        self.face_weights = fw;
    }

    pub fn base(&self) -> &SimplicialSurface {
        &self.base
    }

    pub fn dual(&self) -> &DualMesh {
        &self.dual
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_vertices(&self) -> usize {
        self.n_slices * self.base.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.n_slices * self.base.n_edges() + (self.n_slices - 1) * self.base.n_vertices()
    }

    pub fn n_faces(&self) -> usize {
        self.n_slices * self.base.n_faces() + (self.n_slices - 1) * self.base.n_edges()
    }

    pub fn n_prisms(&self) -> usize {
        (self.n_slices - 1) * self.base.n_faces()
    }

    pub fn cell_count(&self, degree: usize) -> usize {
        match degree {
            0 => self.n_vertices(),
            1 => self.n_edges(),
            2 => self.n_faces(),
            _ => self.n_prisms(),
        }
    }

    pub fn vertex(&self, v: usize, slice: usize) -> usize {
        slice * self.base.n_vertices() + v
    }

    pub fn spatial_edge(&self, e: usize, slice: usize) -> usize {
        slice * self.base.n_edges() + e
    }

    pub fn temporal_edge(&self, v: usize, interval: usize) -> usize {
        self.n_slices * self.base.n_edges() + interval * self.base.n_vertices() + v
    }

    pub fn spatial_face(&self, f: usize, slice: usize) -> usize {
        slice * self.base.n_faces() + f
    }

    pub fn side_face(&self, e: usize, interval: usize) -> usize {
        self.n_slices * self.base.n_faces() + interval * self.base.n_edges() + e
    }

    pub fn prism(&self, f: usize, interval: usize) -> usize {
        interval * self.base.n_faces() + f
    }

    /// Signed incidence of `(degree + 1)`-cells on `degree`-cells.
    pub fn incidence(&self, degree: usize) -> &Incidence {
        &self.incidence[degree]
    }

    /// Lorentz-signed Hodge weights of the edges.
    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// Lorentz-signed Hodge weights of the faces.
    pub fn face_weights(&self) -> &[f64] {
        &self.face_weights
    }

    /// Unsigned metric measure of a face: `|P|` or `|e| dt`.
    pub fn face_measure(&self, face: usize) -> f64 {
        let spatial = self.n_slices * self.base.n_faces();
        if face < spatial {
            self.dual.face_areas[face % self.base.n_faces()]
        } else {
            self.dual.edge_lengths[(face - spatial) % self.base.n_edges()] * self.dt
        }
    }

    fn expect(&self, form: &SpacetimeForm, degree: usize) -> Result<(), SpacetimeError> {
        if form.degree != degree {
            return Err(SpacetimeError::DegreeMismatch {
                expected: degree,
                found: form.degree,
            });
        }
        let expected = self.cell_count(degree);
        if form.values.len() != expected {
            return Err(SpacetimeError::LengthMismatch {
                expected,
                found: form.values.len(),
            });
        }
        Ok(())
    }

    pub fn zeros(&self, degree: usize) -> SpacetimeForm {
        SpacetimeForm {
            degree,
            values: vec![0.0; self.cell_count(degree)],
        }
    }

    pub fn form(&self, degree: usize, values: Vec<f64>) -> Result<SpacetimeForm, SpacetimeError> {
        let form = SpacetimeForm { degree, values };
        self.expect(&form, degree)?;
        Ok(form)
    }

    pub fn exterior_derivative(&self, form: &SpacetimeForm) -> Result<SpacetimeForm, SpacetimeError> {
        if form.degree > 2 {
            return Err(SpacetimeError::DegreeMismatch {
                expected: 2,
                found: form.degree,
            });
        }
        self.expect(form, form.degree)?;
        Ok(SpacetimeForm {
            degree: form.degree + 1,
            values: self.incidence[form.degree].apply(&form.values),
        })
    }

    /// `F = dA`.
    pub fn curvature(&self, a: &SpacetimeForm) -> Result<SpacetimeForm, SpacetimeError> {
        self.expect(a, 1)?;
        self.exterior_derivative(a)
    }

    /// `dF` on the prisms.
    pub fn bianchi_residual(&self, f: &SpacetimeForm) -> Result<SpacetimeForm, SpacetimeError> {
        self.expect(f, 2)?;
        self.exterior_derivative(f)
    }

    /// `L(A, J) = -1/2 <dA, dA> + <A, J>` with the Lorentz-signed weights.
    pub fn lagrangian(&self, a: &SpacetimeForm, j: &SpacetimeForm) -> Result<f64, SpacetimeError> {
        self.expect(j, 1)?;
        let f = self.curvature(a)?;
        let field: f64 = f.values.iter().zip(&self.face_weights).map(|(x, w)| w * x * x).sum();
        let coupling: f64 = a
            .values
            .iter()
            .zip(&j.values)
            .zip(&self.edge_weights)
            .map(|((x, y), w)| w * x * y)
            .sum();
        Ok(-0.5 * field + coupling)
    }

    /// `d^T (*F) - *J` per edge. For `F = dA` this is minus the gradient
    /// of [`PrismComplex::lagrangian`] with respect to `A`.
    pub fn source_residual(&self, f: &SpacetimeForm, j: &SpacetimeForm) -> Result<SpacetimeForm, SpacetimeError> {
        self.expect(f, 2)?;
        self.expect(j, 1)?;
        let starred: Vec<f64> = f.values.iter().zip(&self.face_weights).map(|(x, w)| w * x).collect();
        let mut r = self.incidence[1].apply_transpose(&starred);
        for ((r, x), w) in r.iter_mut().zip(&j.values).zip(&self.edge_weights) {
            *r -= w * x;
        }
        Ok(SpacetimeForm { degree: 1, values: r })
    }

    /// `d^T (*J)` per vertex.
    pub fn continuity_residual(&self, j: &SpacetimeForm) -> Result<SpacetimeForm, SpacetimeError> {
        self.expect(j, 1)?;
        let starred: Vec<f64> = j.values.iter().zip(&self.edge_weights).map(|(x, w)| w * x).collect();
        Ok(SpacetimeForm {
            degree: 0,
            values: self.incidence[0].apply_transpose(&starred),
        })
    }

    /// `A + df`.
    pub fn gauge_transform(&self, a: &SpacetimeForm, f: &SpacetimeForm) -> Result<SpacetimeForm, SpacetimeError> {
        self.expect(a, 1)?;
        self.expect(f, 0)?;
        let df = self.exterior_derivative(f)?;
        Ok(SpacetimeForm {
            degree: 1,
            values: a.values.iter().zip(&df.values).map(|(x, y)| x + y).collect(),
        })
    }

    /// A current with zero continuity residual built from a face potential:
    /// `J = (d^T psi) / w_edge`, so that `d^T (*J) = d^T d^T psi = 0`.
    pub fn conserved_current(&self, potential: &[f64]) -> Result<SpacetimeForm, SpacetimeError> {
        if potential.len() != self.n_faces() {
            return Err(SpacetimeError::LengthMismatch {
                expected: self.n_faces(),
                found: potential.len(),
            });
        }
        let flux = self.incidence[1].apply_transpose(potential);
        Ok(SpacetimeForm {
            degree: 1,
            values: flux.iter().zip(&self.edge_weights).map(|(x, w)| x / w).collect(),
        })
    }

    /// Edges whose dual cell lies inside the lattice: spatial edges on
    /// slices `1..S-1` off the spatial boundary, and temporal edges at
    /// interior base vertices.
    pub fn interior_edges(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for s in 1..self.n_slices - 1 {
            for e in 0..self.base.n_edges() {
                if !self.base.is_boundary_edge(e) {
                    out.push(self.spatial_edge(e, s));
                }
            }
        }
        for k in 0..self.n_slices - 1 {
            for v in 0..self.base.n_vertices() {
                if !self.base.is_boundary_vertex(v) {
                    out.push(self.temporal_edge(v, k));
                }
            }
        }
        out
    }
}

/// Curvature of a TE history in the lattice's units.
///
/// `states[s]` must be at step `states[0].step + s`. With `c = 1 /
/// sqrt(epsilon mu)` the fields are rescaled to `E' = sqrt(epsilon) E` and
/// `B' = sqrt(mu) H` and the lattice step must equal `c dt`. The side quad
/// `(e, k)` receives `E'^(k+1/2) |e| dt'` and the spatial face `(f, s)`
/// receives `B'^s |P|`.
pub fn embed_te_trajectory(
    states: &[SimState],
    prism: &PrismComplex,
    epsilon: f64,
    mu: f64,
) -> Result<SpacetimeForm, SpacetimeError> {
    let ns = prism.n_slices();
    if states.len() != ns {
        return Err(SpacetimeError::SliceMismatch {
            expected: ns,
            found: states.len(),
        });
    }
    let base = prism.base();
    let c = 1.0 / (epsilon * mu).sqrt();
    for (i, st) in states.iter().enumerate() {
        let bad = |reason: String| SpacetimeError::IncompatibleState { index: i, reason };
        if st.polarization != Polarization::Te {
            return Err(bad("not a TE state".into()));
        }
        if st.edge_field.len() != base.n_edges() || st.face_field.len() != base.n_faces() {
            return Err(bad("field sizes differ from the base mesh".into()));
        }
        if st.step != states[0].step + i as u64 {
            return Err(bad("states are not consecutive steps".into()));
        }
        if (c * st.dt - prism.dt()).abs() > 1e-12 * prism.dt() {
            return Err(bad(format!(
                "c dt = {} but the lattice step is {}",
                c * st.dt,
                prism.dt()
            )));
        }
    }
    let (se, sh) = (epsilon.sqrt(), mu.sqrt());
    let dual = prism.dual();
    let mut f = prism.zeros(2);
    for (s, st) in states.iter().enumerate() {
        for (p, h) in st.face_field.iter().enumerate() {
            f.values[prism.spatial_face(p, s)] = sh * h * dual.face_areas[p];
        }
    }
    for k in 0..ns - 1 {
        for (e, u) in states[k + 1].edge_field.iter().enumerate() {
            f.values[prism.side_face(e, k)] = se * u * dual.edge_lengths[e] * prism.dt();
        }
    }
    Ok(f)
}

/// Bianchi and source residuals of an embedded source-free trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryResiduals {
    /// Max `|dF|` over all prisms.
    pub bianchi: f64,
    /// Max `|d^T *F|` over [`PrismComplex::interior_edges`].
    pub source: f64,
    /// Max `|F|`, the reference scale for `bianchi`.
    pub field_scale: f64,
    /// Max over interior edges of the largest single term of `d^T *F`,
    /// the reference scale for `source`.
    pub source_scale: f64,
}

pub fn trajectory_residuals(prism: &PrismComplex, f: &SpacetimeForm) -> Result<TrajectoryResiduals, SpacetimeError> {
    let bianchi = prism.bianchi_residual(f)?.max_abs();
    let zero = prism.zeros(1);
    let r = prism.source_residual(f, &zero)?;
    let starred: Vec<f64> = f
        .values
        .iter()
        .zip(prism.face_weights())
        .map(|(x, w)| (w * x).abs())
        .collect();
    let inc = prism.incidence(1);
    let mut term_max = vec![0.0f64; prism.n_edges()];
    for (face, row) in inc.rows().enumerate() {
        for &(e, _) in row {
            term_max[e] = term_max[e].max(starred[face]);
        }
    }
    let interior = prism.interior_edges();
    Ok(TrajectoryResiduals {
        bianchi,
        source: interior.iter().map(|&e| r.values[e].abs()).fold(0.0, f64::max),
        field_scale: f.max_abs(),
        source_scale: interior.iter().map(|&e| term_max[e]).fold(0.0, f64::max),
    })
}
