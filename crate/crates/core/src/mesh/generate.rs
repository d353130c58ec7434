//! Procedural meshes used by the validation suites, the tests and the CLI.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_complex, Point3, SimplicialSurface};

/// `nx` by `ny` axis-aligned rectangles of size `hx` by `hy`, lower-left
/// corner at the origin, in the plane `z = 0`.
///
/// Vertex `(i, j)` has id `i + j * (nx + 1)`; face `(i, j)` has id `i + j * nx`.
pub fn quad_grid(nx: usize, ny: usize, hx: f64, hy: f64) -> SimplicialSurface {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(i as f64 * hx, j as f64 * hy, 0.0));
        }
    }
    let id = |i: usize, j: usize| i + j * (nx + 1);
    let mut faces = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build_complex(vertices, faces).expect("grid is a valid complex")
}

/// Regular icosahedron inscribed in a sphere of the given radius, faces
/// oriented outward.
pub fn icosahedron(radius: f64) -> SimplicialSurface {
    let (vertices, faces) = icosahedron_raw(radius);
    build_complex(vertices, faces).expect("icosahedron is a valid complex")
}

fn icosahedron_raw(radius: f64) -> (Vec<Point3>, Vec<Vec<usize>>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices = Vec::with_capacity(12);
    for &(a, b) in &[(-1.0, phi), (1.0, phi), (-1.0, -phi), (1.0, -phi)] {
        vertices.push(Point3::new(a, b, 0.0));
    }
    for &(a, b) in &[(-1.0, phi), (1.0, phi), (-1.0, -phi), (1.0, -phi)] {
        vertices.push(Point3::new(0.0, a, b));
    }
    for &(a, b) in &[(-1.0, phi), (1.0, phi), (-1.0, -phi), (1.0, -phi)] {
        vertices.push(Point3::new(b, 0.0, a));
    }
    let scale = radius / vertices[0].norm();
    for v in &mut vertices {
        *v = *v * scale;
    }
    // Edges join vertices at the minimal distance; faces are the 3-cliques.
    let edge = 2.0 * scale;
    let adjacent = |a: usize, b: usize| (vertices[a].distance(vertices[b]) - edge).abs() < 1e-9 * radius;
    let mut faces = Vec::with_capacity(20);
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                if adjacent(a, b) && adjacent(b, c) && adjacent(a, c) {
                    faces.push(outward(&vertices, [a, b, c]));
                }
            }
        }
    }
    (vertices, faces)
}

fn outward(vertices: &[Point3], [a, b, c]: [usize; 3]) -> Vec<usize> {
    let n = (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
    let centroid = vertices[a] + vertices[b] + vertices[c];
    if n.dot(centroid) >= 0.0 {
        vec![a, b, c]
    } else {
        vec![a, c, b]
    }
}

/// Icosahedron refined `subdivisions` times by edge midpoints, every vertex
/// projected onto the sphere. Face count is `20 * 4^subdivisions`.
pub fn icosphere(subdivisions: u32, radius: f64) -> SimplicialSurface {
    let (mut vertices, mut faces) = icosahedron_raw(radius);
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = vertices[a].midpoint(vertices[b]);
                vertices.push(m * (radius / m.norm()));
                vertices.len() - 1
            })
        };
        let mut refined = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let (a, b, c) = (f[0], f[1], f[2]);
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            refined.push(vec![a, ab, ca]);
            refined.push(vec![ab, b, bc]);
            refined.push(vec![ca, bc, c]);
            refined.push(vec![ab, bc, ca]);
        }
        faces = refined;
    }
    build_complex(vertices, faces).expect("icosphere is a valid complex")
}

/// Vertex positions and faces of an equilateral triangle of side `side`
/// (corners `(0,0)`, `(side,0)`, `(side/2, side*sqrt(3)/2)`) split into
/// `n * n` congruent equilateral triangles.
fn equilateral_raw(n: usize, side: f64) -> (Vec<Point3>, Vec<Vec<usize>>, Vec<(usize, usize)>) {
    let h = side / n as f64;
    let s3 = 3f64.sqrt();
    let mut index = HashMap::new();
    let mut vertices = Vec::new();
    let mut lattice = Vec::new();
    for j in 0..=n {
        for i in 0..=n - j {
            index.insert((i, j), vertices.len());
            vertices.push(Point3::new(
                (i as f64 + 0.5 * j as f64) * h,
                0.5 * s3 * j as f64 * h,
                0.0,
            ));
            lattice.push((i, j));
        }
    }
    let mut faces = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n - j {
            faces.push(vec![index[&(i, j)], index[&(i + 1, j)], index[&(i, j + 1)]]);
            if i + j + 1 < n {
                faces.push(vec![index[&(i + 1, j)], index[&(i + 1, j + 1)], index[&(i, j + 1)]]);
            }
        }
    }
    (vertices, faces, lattice)
}

/// Equilateral triangle of side `side` subdivided into `n^2` equilateral faces.
pub fn equilateral_patch(n: usize, side: f64) -> SimplicialSurface {
    let (vertices, faces, _) = equilateral_raw(n, side);
    build_complex(vertices, faces).expect("equilateral patch is a valid complex")
}

fn max_angle(a: Point3, b: Point3, c: Point3) -> f64 {
    let angle = |p: Point3, q: Point3, r: Point3| {
        let (u, v) = (q - p, r - p);
        (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos()
    };
    angle(a, b, c).max(angle(b, c, a)).max(angle(c, a, b))
}

/// Largest interior angle allowed after jittering (80 degrees).
pub const MAX_JITTERED_ANGLE: f64 = 80.0 * std::f64::consts::PI / 180.0;

/// [`equilateral_patch`] with every vertex randomly displaced by up to
/// `jitter * side / n`: interior vertices in any direction, boundary vertices
/// along their side, corners fixed. A displacement is redrawn (and finally
/// dropped) if it would push an incident angle above [`MAX_JITTERED_ANGLE`],
/// so every face stays acute and the outline stays an exact triangle.
pub fn jittered_equilateral(n: usize, side: f64, jitter: f64, seed: u64) -> SimplicialSurface {
    let (mut vertices, faces, lattice) = equilateral_raw(n, side);
    let h = side / n as f64;
    let s3 = 3f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (f, face) in faces.iter().enumerate() {
        for &v in face {
            incident[v].push(f);
        }
    }
    for (v, &(i, j)) in lattice.iter().enumerate() {
        let k = n - i - j;
        let on_side = [j == 0, i == 0, k == 0];
        let direction = match on_side.iter().filter(|&&b| b).count() {
            0 => None,
            1 if on_side[0] => Some(Point3::new(1.0, 0.0, 0.0)),
            1 if on_side[1] => Some(Point3::new(0.5, 0.5 * s3, 0.0)),
            1 => Some(Point3::new(-0.5, 0.5 * s3, 0.0)),
            _ => continue, // corner
        };
        let original = vertices[v];
        for _attempt in 0..20 {
            let r = jitter * h * rng.gen::<f64>().sqrt();
            let displacement = match direction {
                Some(d) => d * (r * if rng.gen::<bool>() { 1.0 } else { -1.0 }),
                None => {
                    let t = rng.gen::<f64>() * std::f64::consts::TAU;
                    Point3::new(r * t.cos(), r * t.sin(), 0.0)
                }
            };
            vertices[v] = original + displacement;
            let ok = incident[v].iter().all(|&f| {
                let fv = &faces[f];
                max_angle(vertices[fv[0]], vertices[fv[1]], vertices[fv[2]]) < MAX_JITTERED_ANGLE
            });
            if ok {
                break;
            }
            vertices[v] = original;
        }
    }
    build_complex(vertices, faces).expect("jittered patch is a valid complex")
}

/// A randomly labelled triangulation of the unit square with `2 * n * n`
/// faces: jittered grid vertices, random diagonals, shuffled vertex ids and
/// face order. Faces need not be acute.
pub fn random_triangulation(n: usize, seed: u64) -> SimplicialSurface {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let mut perm: Vec<usize> = (0..(n + 1) * (n + 1)).collect();
    perm.shuffle(&mut rng);
    let mut vertices = vec![Point3::ZERO; perm.len()];
    for j in 0..=n {
        for i in 0..=n {
            let interior = i > 0 && j > 0 && i < n && j < n;
            let (dx, dy) = if interior {
                (rng.gen_range(-0.25..0.25) * h, rng.gen_range(-0.25..0.25) * h)
            } else {
                (0.0, 0.0)
            };
            vertices[perm[i + j * (n + 1)]] = Point3::new(i as f64 * h + dx, j as f64 * h + dy, 0.0);
        }
    }
    let id = |i: usize, j: usize| perm[i + j * (n + 1)];
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rng.gen::<bool>() {
                faces.push(vec![a, b, c]);
                faces.push(vec![a, c, d]);
            } else {
                faces.push(vec![a, b, d]);
                faces.push(vec![b, c, d]);
            }
        }
    }
    faces.shuffle(&mut rng);
    // random starting vertex and orientation per face
    for f in &mut faces {
        let k = rng.gen_range(0..3);
        f.rotate_left(k);
        if rng.gen::<bool>() {
            f.reverse();
        }
    }
    build_complex(vertices, faces).expect("random triangulation is a valid complex")
}

#[cfg(test)]
mod tests {
    use super::super::{build_dual, DualMode};
    use super::*;

    #[test]
    fn counts() {
        let g = quad_grid(3, 2, 1.0, 1.0);
        assert_eq!((g.n_vertices(), g.n_edges(), g.n_faces()), (12, 17, 6));
        let s = icosphere(2, 1.0);
        assert_eq!(s.n_faces(), 320);
        assert_eq!(s.euler_characteristic(), 2);
        let t = equilateral_patch(4, 1.0);
        assert_eq!(t.n_faces(), 16);
        assert_eq!(t.euler_characteristic(), 1);
        let r = random_triangulation(10, 7);
        assert_eq!(r.n_faces(), 200);
        assert_eq!(r.euler_characteristic(), 1);
    }

    #[test]
    fn icosphere_is_acute() {
        let s = icosphere(3, 1.0);
        let d = build_dual(&s, DualMode::Strict).unwrap();
        assert!(d.all_acute());
    }

    #[test]
    fn jittered_patch_is_acute_and_keeps_outline() {
        let side = 1.0;
        let t = jittered_equilateral(12, side, 0.25, 3);
        let d = build_dual(&t, DualMode::Strict).unwrap();
        assert!(d.all_acute());
        let area: f64 = d.face_areas.iter().sum();
        assert!((area - 3f64.sqrt() / 4.0).abs() < 1e-12);
        let reference = equilateral_patch(12, side);
        let moved = t
            .vertices()
            .iter()
            .zip(reference.vertices())
            .filter(|(a, b)| a.distance(**b) > 0.0)
            .count();
        assert!(moved > t.n_vertices() / 2);
    }
}
