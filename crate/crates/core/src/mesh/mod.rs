//! Oriented polygonal surfaces, their circumcentric duals and signed
//! incidence operators.
//!
//! A [`SimplicialSurface`] is built from raw vertex coordinates and face
//! loops with [`build_complex`]. Edges are deduplicated and canonically
//! oriented from the smaller to the larger vertex id, faces are reoriented
//! so that neighbours agree, and both boundary operators are assembled as
//! sparse signed incidence tables. [`build_dual`] then computes the metric
//! data every discrete operator needs.

mod dual;
pub mod generate;
mod geometry;

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

pub use dual::{build_dual, mesh_quality, DualMesh, DualMode, MeshQuality};
pub use geometry::{circumcenter, vector_area, Point3, CONCYCLIC_TOLERANCE, PLANARITY_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteCoordinate { vertex: usize },
    #[error("vertex id {vertex} out of range ({count} vertices)")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("face has fewer than 3 vertices")]
    TooFewVertices,
    #[error("vertex {vertex} repeats in the face loop")]
    RepeatedVertex { vertex: usize },
    #[error("edge ({tail}, {head}) is shared by {faces} faces")]
    NonManifoldEdge { tail: usize, head: usize, faces: usize },
    #[error("surface is not orientable (conflict at face {face})")]
    NonOrientable { face: usize },
    #[error("vertices are collinear")]
    Collinear,
    #[error("polygon is not cyclic (relative radius deviation {relative_deviation:.3e})")]
    NotConcyclic { relative_deviation: f64 },
    #[error("polygon is not planar")]
    NonPlanar,
    #[error("circumcenter is not strictly inside the face")]
    NonAcute,
    #[error("face has zero area")]
    ZeroArea,
    #[error("edge {edge} has zero length")]
    ZeroEdgeLength { edge: usize },
    #[error("edge {edge} has non-positive dual length {length:e}")]
    ZeroDualLength { edge: usize, length: f64 },
    #[error("face {face}: {source}")]
    Face {
        face: usize,
        #[source]
        source: Box<MeshError>,
    },
}

impl MeshError {
    pub(crate) fn at_face(self, face: usize) -> MeshError {
        MeshError::Face {
            face,
            source: Box::new(self),
        }
    }
}

/// Edge stored with its canonical orientation `tail < head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge {
    pub tail: usize,
    pub head: usize,
}

/// A polygonal face: a vertex loop plus the signed edges it traverses.
///
/// `edges[i]` is the edge from `vertices[i]` to `vertices[i + 1]` with sign
/// `+1` when the loop runs tail to head.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedFace {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, i8)>,
}

/// Sparse signed incidence of `rows` cells on `cols` lower-dimensional cells.
///
/// Row `r` lists the boundary of cell `r`. Applying the table to a cochain on
/// the lower cells is the coboundary (the discrete exterior derivative);
/// applying its transpose gives the adjoint used by the dual operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    n_cols: usize,
    rows: Vec<Vec<(usize, i8)>>,
}

impl Incidence {
    pub fn new(n_cols: usize, rows: Vec<Vec<(usize, i8)>>) -> Self {
        debug_assert!(rows.iter().flatten().all(|&(c, _)| c < n_cols));
        Self { n_cols, rows }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[(usize, i8)] {
        &self.rows[r]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, i8)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    /// `out[r] = sum_c sign(r, c) * x[c]`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, s)| f64::from(s) * x[c]).sum())
            .collect()
    }

    /// `out[c] = sum_r sign(r, c) * y[r]`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows.len());
        let mut out = vec![0.0; self.n_cols];
        for (row, &v) in self.rows.iter().zip(y) {
            for &(c, s) in row {
                out[c] += f64::from(s) * v;
            }
        }
        out
    }

    pub fn transpose(&self) -> Incidence {
        let mut rows = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, s) in row {
                rows[c].push((r, s));
            }
        }
        Incidence::new(self.rows.len(), rows)
    }

    /// Integer product `self * inner` (`inner` maps to the columns of `self`),
    /// with zero entries dropped.
    pub fn compose(&self, inner: &Incidence) -> BTreeMap<(usize, usize), i64> {
        assert_eq!(self.n_cols, inner.n_rows());
        let mut out = BTreeMap::new();
        for (r, row) in self.rows.iter().enumerate() {
            for &(mid, s1) in row {
                for &(c, s2) in inner.row(mid) {
                    *out.entry((r, c)).or_insert(0i64) += i64::from(s1) * i64::from(s2);
                }
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }
}

/// An oriented 2-manifold (possibly with boundary) made of polygonal faces.
#[derive(Clone, Debug)]
pub struct SimplicialSurface {
    vertices: Vec<Point3>,
    edges: Vec<OrientedEdge>,
    faces: Vec<OrientedFace>,
    boundary1: Incidence,
    boundary2: Incidence,
    coboundary2: Incidence,
    boundary_edges: Vec<usize>,
    on_boundary_edge: Vec<bool>,
    on_boundary_vertex: Vec<bool>,
}

impl SimplicialSurface {
    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn faces(&self) -> &[OrientedFace] {
        &self.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Signed incidence of edges on vertices (`-1` tail, `+1` head).
    pub fn boundary1(&self) -> &Incidence {
        &self.boundary1
    }

    /// Signed incidence of faces on edges.
    pub fn boundary2(&self) -> &Incidence {
        &self.boundary2
    }

    /// Faces incident to each edge with the sign the face induces on it.
    pub fn edge_faces(&self, edge: usize) -> &[(usize, i8)] {
        self.coboundary2.row(edge)
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.on_boundary_edge[edge]
    }

    pub fn is_boundary_vertex(&self, vertex: usize) -> bool {
        self.on_boundary_vertex[vertex]
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edges.is_empty()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    /// Id of the undirected edge `{a, b}`, if present.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let key = OrientedEdge {
            tail: a.min(b),
            head: a.max(b),
        };
        self.edges.binary_search(&key).ok()
    }

    /// Same connectivity with every vertex moved by `f`.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> SimplicialSurface {
        let mut out = self.clone();
        for p in &mut out.vertices {
            *p = f(*p);
        }
        out
    }
}

/// Assemble an oriented surface from vertex positions and face loops.
///
/// Faces are reoriented (loop reversed) where needed so that every interior
/// edge is traversed in opposite directions by its two faces; the first face
/// of each connected component keeps its input orientation.
pub fn build_complex(vertices: Vec<Point3>, face_loops: Vec<Vec<usize>>) -> Result<SimplicialSurface, MeshError> {
    for (v, p) in vertices.iter().enumerate() {
        if !p.is_finite() {
            return Err(MeshError::NonFiniteCoordinate { vertex: v });
        }
    }
    for (f, face) in face_loops.iter().enumerate() {
        if face.len() < 3 {
            return Err(MeshError::TooFewVertices.at_face(f));
        }
        for (i, &v) in face.iter().enumerate() {
            if v >= vertices.len() {
                return Err(MeshError::VertexOutOfRange {
                    vertex: v,
                    count: vertices.len(),
                }
                .at_face(f));
            }
            if face[..i].contains(&v) {
                return Err(MeshError::RepeatedVertex { vertex: v }.at_face(f));
            }
        }
    }

    // Canonical, order-independent edge ids: sorted by (tail, head).
    let mut edges: Vec<OrientedEdge> = face_loops
        .iter()
        .flat_map(|face| {
            (0..face.len()).map(move |i| {
                let (a, b) = (face[i], face[(i + 1) % face.len()]);
                OrientedEdge {
                    tail: a.min(b),
                    head: a.max(b),
                }
            })
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let edge_id = |a: usize, b: usize| -> usize {
        edges
            .binary_search(&OrientedEdge {
                tail: a.min(b),
                head: a.max(b),
            })
            .expect("edge collected above")
    };

    let mut edge_faces: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
    for (f, face) in face_loops.iter().enumerate() {
        for i in 0..face.len() {
            let e = edge_id(face[i], face[(i + 1) % face.len()]);
            edge_faces[e].push(f);
        }
    }
    for (e, fs) in edge_faces.iter().enumerate() {
        if fs.len() > 2 {
            return Err(MeshError::NonManifoldEdge {
                tail: edges[e].tail,
                head: edges[e].head,
                faces: fs.len(),
            });
        }
    }

    // Direction in which face `f` (with flip state) traverses edge `e`.
    let traversal = |face: &[usize], flipped: bool, e: usize| -> i8 {
        let n = face.len();
        for i in 0..n {
            let (a, b) = (face[i], face[(i + 1) % n]);
            if edge_id(a, b) == e {
                let forward = a < b;
                return if forward != flipped { 1 } else { -1 };
            }
        }
        unreachable!("edge belongs to face")
    };

    let mut flip: Vec<Option<bool>> = vec![None; face_loops.len()];
    for root in 0..face_loops.len() {
        if flip[root].is_some() {
            continue;
        }
        flip[root] = Some(false);
        let mut queue = VecDeque::from([root]);
        while let Some(f) = queue.pop_front() {
            let face = &face_loops[f];
            let f_flip = flip[f].expect("visited");
            for i in 0..face.len() {
                let e = edge_id(face[i], face[(i + 1) % face.len()]);
                let s = traversal(face, f_flip, e);
                for &g in &edge_faces[e] {
                    if g == f {
                        continue;
                    }
                    // neighbour must traverse e in the opposite direction
                    match flip[g] {
                        Some(g_flip) => {
                            if traversal(&face_loops[g], g_flip, e) == s {
                                return Err(MeshError::NonOrientable { face: g });
                            }
                        }
                        None => {
                            let natural = traversal(&face_loops[g], false, e);
                            flip[g] = Some(natural == s);
                            queue.push_back(g);
                        }
                    }
                }
            }
        }
    }

    let faces: Vec<OrientedFace> = face_loops
        .iter()
        .zip(&flip)
        .map(|(face, fl)| {
            let verts: Vec<usize> = if fl.expect("all faces visited") {
                std::iter::once(face[0])
                    .chain(face[1..].iter().rev().copied())
                    .collect()
            } else {
                face.clone()
            };
            let n = verts.len();
            let loop_edges = (0..n)
                .map(|i| {
                    let (a, b) = (verts[i], verts[(i + 1) % n]);
                    (edge_id(a, b), if a < b { 1 } else { -1 })
                })
                .collect();
            OrientedFace {
                vertices: verts,
                edges: loop_edges,
            }
        })
        .collect();

    let boundary1 = Incidence::new(
        vertices.len(),
        edges.iter().map(|e| vec![(e.tail, -1), (e.head, 1)]).collect(),
    );
    let boundary2 = Incidence::new(edges.len(), faces.iter().map(|f| f.edges.clone()).collect());
    let coboundary2 = boundary2.transpose();

    let boundary_edges: Vec<usize> = (0..edges.len()).filter(|&e| coboundary2.row(e).len() == 1).collect();
    let mut on_boundary_edge = vec![false; edges.len()];
    let mut on_boundary_vertex = vec![false; vertices.len()];
    for &e in &boundary_edges {
        on_boundary_edge[e] = true;
        on_boundary_vertex[edges[e].tail] = true;
        on_boundary_vertex[edges[e].head] = true;
    }

    Ok(SimplicialSurface {
        vertices,
        edges,
        faces,
        boundary1,
        boundary2,
        coboundary2,
        boundary_edges,
        on_boundary_edge,
        on_boundary_vertex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 0.0)
    }

    #[test]
    fn single_triangle() {
        let c = build_complex(vec![p(0., 0.), p(1., 0.), p(0., 1.)], vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(c.n_edges(), 3);
        assert_eq!(c.n_faces(), 1);
        assert_eq!(c.boundary_edges().len(), 3);
        assert!(!c.is_closed());
        for e in c.edges() {
            assert!(e.tail < e.head);
        }
    }

    #[test]
    fn single_quad() {
        let c = build_complex(vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)], vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(c.n_edges(), 4);
        assert_eq!(c.n_faces(), 1);
    }

    #[test]
    fn shared_edge_gets_opposite_signs_even_if_input_disagrees() {
        // second face given with inconsistent orientation on purpose
        let c = build_complex(
            vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap();
        assert_eq!(c.n_edges(), 5);
        let shared = c.find_edge(0, 2).unwrap();
        let signs: Vec<i8> = c.edge_faces(shared).iter().map(|&(_, s)| s).collect();
        assert_eq!(signs.len(), 2);
        assert_eq!(signs[0], -signs[1]);

        let c2 = build_complex(
            vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)],
            vec![vec![0, 1, 2], vec![0, 3, 2]],
        )
        .unwrap();
        let signs: Vec<i8> = c2.edge_faces(shared).iter().map(|&(_, s)| s).collect();
        assert_eq!(signs[0], -signs[1]);
        assert_eq!(c2.faces()[1].vertices, vec![0, 2, 3]);
    }

    #[test]
    fn edge_loop_reproduces_vertex_loop() {
        let c = generate::icosahedron(1.0);
        for f in c.faces() {
            let n = f.vertices.len();
            for i in 0..n {
                let (e, s) = f.edges[i];
                let edge = c.edges()[e];
                let (from, to) = if s > 0 {
                    (edge.tail, edge.head)
                } else {
                    (edge.head, edge.tail)
                };
                assert_eq!(from, f.vertices[i]);
                assert_eq!(to, f.vertices[(i + 1) % n]);
            }
        }
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let verts = vec![p(0., 0.), p(1., 0.), p(0., 1.), p(0., -1.), Point3::new(0., 0., 1.)];
        let err = build_complex(verts, vec![vec![0, 1, 2], vec![1, 0, 3], vec![0, 1, 4]]).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge { faces: 3, .. }));
    }

    #[test]
    fn degenerate_faces_are_rejected() {
        let verts = vec![p(0., 0.), p(1., 0.), p(0., 1.)];
        assert!(matches!(
            build_complex(verts.clone(), vec![vec![0, 1, 1]]),
            Err(MeshError::Face { face: 0, .. })
        ));
        assert!(build_complex(verts.clone(), vec![vec![0, 1]]).is_err());
        assert!(matches!(
            build_complex(verts, vec![vec![0, 1, 7]]).unwrap_err(),
            MeshError::Face { .. }
        ));
    }

    #[test]
    fn mobius_strip_is_non_orientable() {
        // A Moebius band from 5 quads: a strip of 10 vertices glued with a twist.
        let n = 5;
        let mut verts = Vec::new();
        for i in 0..n {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            let half = t / 2.0;
            for s in [-0.3, 0.3] {
                let r = 1.0 + s * half.cos();
                verts.push(Point3::new(r * t.cos(), r * t.sin(), s * half.sin()));
            }
        }
        let mut faces = Vec::new();
        for i in 0..n {
            let (a, b) = (2 * i, 2 * i + 1);
            let (c, d) = if i + 1 < n {
                (2 * (i + 1) + 1, 2 * (i + 1))
            } else {
                (0, 1) // twisted gluing
            };
            faces.push(vec![a, b, c, d]);
        }
        assert!(matches!(
            build_complex(verts, faces),
            Err(MeshError::NonOrientable { .. })
        ));
    }

    #[test]
    fn boundary_composition_is_zero_on_icosphere() {
        let c = generate::icosphere(2, 1.0);
        assert!(c.boundary2().compose(c.boundary1()).is_empty());
        assert!(c.is_closed());
        assert_eq!(c.euler_characteristic(), 2);
    }

    #[test]
    fn incidence_apply_matches_transpose() {
        let c = generate::quad_grid(3, 2, 1.0, 1.0);
        let b = c.boundary2();
        let bt = b.transpose();
        let y: Vec<f64> = (0..b.n_rows()).map(|i| i as f64 + 0.5).collect();
        assert_eq!(b.apply_transpose(&y), bt.apply(&y));
    }
}
