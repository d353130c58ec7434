//! Points in the embedding space and circumcenter construction.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::MeshError;

/// Relative tolerance on vertex-to-circumcenter distances for polygonal faces.
pub const CONCYCLIC_TOLERANCE: f64 = 1e-9;

/// Relative tolerance (against the face diameter) on out-of-plane deviation.
pub const PLANARITY_TOLERANCE: f64 = 1e-9;

/// A point (or vector) in the 3D embedding.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Self) -> Self {
        (self + other) * 0.5
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Area vector of a closed polygon: half the sum of consecutive cross products.
/// Its length is the area of a planar polygon and its direction the normal
/// induced by the loop order.
pub fn vector_area(points: &[Point3]) -> Point3 {
    let origin = points[0];
    let mut acc = Point3::ZERO;
    for w in 1..points.len().saturating_sub(1) {
        acc = acc + (points[w] - origin).cross(points[w + 1] - origin);
    }
    acc * 0.5
}

fn diameter(points: &[Point3]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max(p.distance(*q));
        }
    }
    d
}

/// Circumcenter of three points in 3D (lies in their plane).
fn triangle_circumcenter(a: Point3, b: Point3, c: Point3) -> Option<Point3> {
    let u = a - c;
    let v = b - c;
    let w = u.cross(v);
    let w2 = w.norm_squared();
    let scale = u.norm_squared().max(v.norm_squared());
    if w2 <= 1e-28 * scale * scale {
        return None;
    }
    let num = (v * u.norm_squared() - u * v.norm_squared()).cross(w);
    Some(c + num / (2.0 * w2))
}

/// Circumcenter of a face given by its vertex ids.
///
/// For polygons the center is computed from the best-conditioned vertex
/// triple, chosen from the id-sorted vertex set so that the result does not
/// depend on where the loop starts, and every vertex is then required to lie
/// on the circumcircle and in the face plane.
pub fn circumcenter(face: &[usize], vertices: &[Point3]) -> Result<Point3, MeshError> {
    if face.len() < 3 {
        return Err(MeshError::TooFewVertices);
    }
    let mut ids: Vec<usize> = face.to_vec();
    ids.sort_unstable();
    let pts: Vec<Point3> = ids
        .iter()
        .map(|&v| {
            vertices.get(v).copied().ok_or(MeshError::VertexOutOfRange {
                vertex: v,
                count: vertices.len(),
            })
        })
        .collect::<Result<_, _>>()?;

    let (mut best, mut best_area) = ((0, 1, 2), -1.0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let area = (pts[j] - pts[i]).cross(pts[k] - pts[i]).norm_squared();
                if area > best_area {
                    best_area = area;
                    best = (i, j, k);
                }
            }
        }
    }
    let (i, j, k) = best;
    let center = triangle_circumcenter(pts[i], pts[j], pts[k]).ok_or(MeshError::Collinear)?;
    if pts.len() == 3 {
        return Ok(center);
    }

    let radius = center.distance(pts[i]);
    let deviation = pts
        .iter()
        .map(|p| (p.distance(center) - radius).abs())
        .fold(0.0, f64::max);
    if deviation > CONCYCLIC_TOLERANCE * radius {
        return Err(MeshError::NotConcyclic {
            relative_deviation: deviation / radius,
        });
    }
    let normal = (pts[j] - pts[i])
        .cross(pts[k] - pts[i])
        .normalized()
        .ok_or(MeshError::Collinear)?;
    let off_plane = pts.iter().map(|p| (*p - center).dot(normal).abs()).fold(0.0, f64::max);
    if off_plane > PLANARITY_TOLERANCE * diameter(&pts) {
        return Err(MeshError::NonPlanar);
    }
    Ok(center)
}
