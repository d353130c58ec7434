//! Circumcentric dual measures.

use std::fmt;

use super::geometry::{circumcenter, vector_area, Point3, PLANARITY_TOLERANCE};
use super::{MeshError, SimplicialSurface};

/// Signed in-face distance below which a circumcenter counts as lying on an
/// edge, relative to the circumradius.
const WELL_CENTERED_TOLERANCE: f64 = 1e-10;

/// How faces whose circumcenter is not strictly interior are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DualMode {
    /// Reject non-acute faces and non-positive dual lengths.
    #[default]
    Strict,
    /// Accept them with signed dual measures and record a warning.
    Lenient,
}

/// Primal and circumcentric-dual measures of a surface.
///
/// Dual edge lengths are accumulated face by face as the signed in-plane
/// distance from each adjacent circumcenter to the edge midpoint, so boundary
/// edges get the truncated half-length. Dual vertex areas are the per-face
/// pieces cut out by circumcenters and edge midpoints.
#[derive(Clone, Debug)]
pub struct DualMesh {
    pub circumcenters: Vec<Point3>,
    pub face_normals: Vec<Point3>,
    pub edge_lengths: Vec<f64>,
    pub face_areas: Vec<f64>,
    pub dual_edge_lengths: Vec<f64>,
    pub dual_vertex_areas: Vec<f64>,
    pub acute: Vec<bool>,
    pub warnings: Vec<String>,
}

impl DualMesh {
    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }

    pub fn dual_edge_length(&self, e: usize) -> f64 {
        self.dual_edge_lengths[e]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_areas[f]
    }

    pub fn dual_vertex_area(&self, v: usize) -> f64 {
        self.dual_vertex_areas[v]
    }

    pub fn all_acute(&self) -> bool {
        self.acute.iter().all(|&a| a)
    }
}

pub fn build_dual(complex: &SimplicialSurface, mode: DualMode) -> Result<DualMesh, MeshError> {
    let verts = complex.vertices();
    let n_e = complex.n_edges();

    let edge_lengths: Vec<f64> = complex
        .edges()
        .iter()
        .map(|e| verts[e.tail].distance(verts[e.head]))
        .collect();
    if let Some(e) = edge_lengths.iter().position(|&l| l <= 0.0) {
        return Err(MeshError::ZeroEdgeLength { edge: e });
    }

    let mut circumcenters = Vec::with_capacity(complex.n_faces());
    let mut face_normals = Vec::with_capacity(complex.n_faces());
    let mut face_areas = Vec::with_capacity(complex.n_faces());
    let mut acute = Vec::with_capacity(complex.n_faces());
    let mut dual_edge_lengths = vec![0.0; n_e];
    let mut dual_vertex_areas = vec![0.0; complex.n_vertices()];
    let mut warnings = Vec::new();

    for (f, face) in complex.faces().iter().enumerate() {
        let pts: Vec<Point3> = face.vertices.iter().map(|&v| verts[v]).collect();
        let area_vec = vector_area(&pts);
        let area = area_vec.norm();
        let normal = area_vec.normalized().ok_or(MeshError::ZeroArea.at_face(f))?;
        let diameter = pts
            .iter()
            .flat_map(|p| pts.iter().map(move |q| p.distance(*q)))
            .fold(0.0, f64::max);
        if area <= 1e-14 * diameter * diameter {
            return Err(MeshError::ZeroArea.at_face(f));
        }
        if pts
            .iter()
            .any(|p| (*p - pts[0]).dot(normal).abs() > PLANARITY_TOLERANCE * diameter)
        {
            return Err(MeshError::NonPlanar.at_face(f));
        }
        let center = circumcenter(&face.vertices, verts).map_err(|e| e.at_face(f))?;
        let radius = center.distance(pts[0]);

        let n = pts.len();
        let mut heights = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let inward = normal.cross(b - a).normalized().ok_or(MeshError::ZeroArea.at_face(f))?;
            heights.push((center - a.midpoint(b)).dot(inward));
        }
        let is_acute = heights.iter().all(|&h| h > WELL_CENTERED_TOLERANCE * radius);
        if !is_acute {
            match mode {
                DualMode::Strict => return Err(MeshError::NonAcute.at_face(f)),
                DualMode::Lenient => warnings.push(format!("face {f}: circumcenter not strictly inside")),
            }
        }

        for i in 0..n {
            let (e, _) = face.edges[i];
            dual_edge_lengths[e] += heights[i];
            let prev = (i + n - 1) % n;
            let le = edge_lengths[e];
            let lp = edge_lengths[face.edges[prev].0];
            dual_vertex_areas[face.vertices[i]] += 0.25 * (le * heights[i] + lp * heights[prev]);
        }

        circumcenters.push(center);
        face_normals.push(normal);
        face_areas.push(area);
        acute.push(is_acute);
    }

    for (e, &len) in dual_edge_lengths.iter().enumerate() {
        if len <= WELL_CENTERED_TOLERANCE * edge_lengths[e] {
            match mode {
                DualMode::Strict => return Err(MeshError::ZeroDualLength { edge: e, length: len }),
                DualMode::Lenient => warnings.push(format!("edge {e}: non-positive dual length {len:e}")),
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    Ok(DualMesh {
        circumcenters,
        face_normals,
        edge_lengths,
        face_areas,
        dual_edge_lengths,
        dual_vertex_areas,
        acute,
        warnings,
    })
}

/// Summary statistics of a surface and its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshQuality {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub min_edge_length: f64,
    pub max_edge_length: f64,
    pub min_dual_length: f64,
    pub non_acute_faces: usize,
    pub closed: bool,
    pub boundary_edges: usize,
    pub euler_characteristic: i64,
    pub total_area: f64,
    pub total_dual_area: f64,
}

pub fn mesh_quality(complex: &SimplicialSurface, dual: &DualMesh) -> MeshQuality {
    let fold_min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    MeshQuality {
        vertices: complex.n_vertices(),
        edges: complex.n_edges(),
        faces: complex.n_faces(),
        min_edge_length: fold_min(&dual.edge_lengths),
        max_edge_length: dual.edge_lengths.iter().copied().fold(0.0, f64::max),
        min_dual_length: fold_min(&dual.dual_edge_lengths),
        non_acute_faces: dual.acute.iter().filter(|&&a| !a).count(),
        closed: complex.is_closed(),
        boundary_edges: complex.boundary_edges().len(),
        euler_characteristic: complex.euler_characteristic(),
        total_area: dual.face_areas.iter().sum(),
        total_dual_area: dual.dual_vertex_areas.iter().sum(),
    }
}

impl fmt::Display for MeshQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices:             {}", self.vertices)?;
        writeln!(f, "edges:                {}", self.edges)?;
        writeln!(f, "faces:                {}", self.faces)?;
        writeln!(f, "euler characteristic: {}", self.euler_characteristic)?;
        writeln!(f, "closed:               {}", self.closed)?;
        writeln!(f, "boundary edges:       {}", self.boundary_edges)?;
        writeln!(f, "min edge length:      {:.6e}", self.min_edge_length)?;
        writeln!(f, "max edge length:      {:.6e}", self.max_edge_length)?;
        writeln!(f, "min dual length:      {:.6e}", self.min_dual_length)?;
        writeln!(f, "non-acute faces:      {}", self.non_acute_faces)?;
        writeln!(f, "total area:           {:.12e}", self.total_area)?;
        write!(f, "total dual area:      {:.12e}", self.total_dual_area)
    }
}
