//! Standing cavity modes with perfectly conducting walls, used as analytic
//! references, and their projection onto edge and face cochains.

use std::f64::consts::PI;

use crate::mesh::{DualMesh, Point3, SimplicialSurface};
use crate::solver::Polarization;

/// Scalar profile `psi` of the normal field component with `-lap psi = k2 psi`.
#[derive(Clone, Debug, PartialEq)]
enum Shape {
    /// `cos(kx x) cos(ky y)` (TE, Neumann) or `sin(kx x) sin(ky y)` (TM,
    /// Dirichlet) on `[0, a] x [0, b]`.
    Rectangle { kx: f64, ky: f64, dirichlet: bool },
    /// `sum_g s_g (cos + sin)(k_g . p)` over the six symmetries of the
    /// equilateral triangle, `s_g = 1` (Neumann) or `det g` (Dirichlet).
    Triangle { waves: Vec<((f64, f64), f64)> },
}

/// A standing mode of the 2D cavity for one polarization.
///
/// TE: `H = psi sin(wt)`, `E = -cos(wt) / (eps w) (d_y psi, -d_x psi)`.
/// TM: `E = psi cos(wt)`, `H = -sin(wt) / (mu w) (d_y psi, -d_x psi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityMode {
    pub polarization: Polarization,
    pub epsilon: f64,
    pub mu: f64,
    shape: Shape,
    wavenumber_squared: f64,
}

/// Mode `(m, n)` of the `a` by `b` rectangle with its lower-left corner at
/// the origin. Angular frequency `c pi sqrt(m^2/a^2 + n^2/b^2)`.
pub fn cavity_solution(
    polarization: Polarization,
    m: usize,
    n: usize,
    a: f64,
    b: f64,
    epsilon: f64,
    mu: f64,
) -> CavityMode {
    let (kx, ky) = (m as f64 * PI / a, n as f64 * PI / b);
    CavityMode {
        polarization,
        epsilon,
        mu,
        shape: Shape::Rectangle {
            kx,
            ky,
            dirichlet: polarization == Polarization::Tm,
        },
        wavenumber_squared: kx * kx + ky * ky,
    }
}

/// Mode of the equilateral triangle with corners `(0,0)`, `(side,0)`,
/// `(side/2, side sqrt(3)/2)`. The wave vector is `m b1 + n b2` in the
/// reciprocal basis `b1 = (4pi/3, 0)`, `b2 = (-2pi/3, 2pi/sqrt(3))` of the
/// reflection lattice (scaled by `1/side`). The lowest TE mode is `(1, 0)`
/// with `k^2 = 16 pi^2 / 9`; the lowest TM mode is `(1, 2)` with
/// `k^2 = 16 pi^2 / 3` (unit side).
pub fn triangle_cavity_solution(
    polarization: Polarization,
    m: i64,
    n: i64,
    side: f64,
    epsilon: f64,
    mu: f64,
) -> CavityMode {
    let s3 = 3f64.sqrt();
    let k = (
        (m as f64 * 4.0 * PI / 3.0 - n as f64 * 2.0 * PI / 3.0) / side,
        (n as f64 * 2.0 * PI / s3) / side,
    );
    let dirichlet = polarization == Polarization::Tm;
    let mut waves = Vec::with_capacity(6);
    for r in 0..3 {
        let th = r as f64 * 2.0 * PI / 3.0;
        let (c, s) = (th.cos(), th.sin());
        // rotation R and reflection R * diag(1, -1); the plane wave
        // exp(i k . g p) has wave vector g^T k
        let rot = [[c, -s], [s, c]];
        let refl = [[c, s], [s, -c]];
        for (g, det) in [(rot, 1.0), (refl, -1.0)] {
            let kg = (g[0][0] * k.0 + g[1][0] * k.1, g[0][1] * k.0 + g[1][1] * k.1);
            waves.push((kg, if dirichlet { det } else { 1.0 }));
        }
    }
    CavityMode {
        polarization,
        epsilon,
        mu,
        shape: Shape::Triangle { waves },
        wavenumber_squared: k.0 * k.0 + k.1 * k.1,
    }
}

impl CavityMode {
    pub fn wavenumber_squared(&self) -> f64 {
        self.wavenumber_squared
    }

    pub fn omega(&self) -> f64 {
        (self.wavenumber_squared / (self.epsilon * self.mu)).sqrt()
    }

    /// Spatial profile and its gradient.
    pub fn profile(&self, x: f64, y: f64) -> (f64, (f64, f64)) {
        match &self.shape {
            Shape::Rectangle { kx, ky, dirichlet } => {
                let (sx, cx) = (kx * x).sin_cos();
                let (sy, cy) = (ky * y).sin_cos();
                if *dirichlet {
                    (sx * sy, (kx * cx * sy, ky * sx * cy))
                } else {
                    (cx * cy, (-kx * sx * cy, -ky * cx * sy))
                }
            }
            Shape::Triangle { waves } => {
                let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
                for &((kx, ky), s) in waves {
                    let (sn, cs) = (kx * x + ky * y).sin_cos();
                    v += s * (cs + sn);
                    gx += s * (cs - sn) * kx;
                    gy += s * (cs - sn) * ky;
                }
                (v, (gx, gy))
            }
        }
    }

    /// Normal (out-of-plane) field component at `(x, y, t)`.
    pub fn normal_field(&self, x: f64, y: f64, t: f64) -> f64 {
        let (psi, _) = self.profile(x, y);
        match self.polarization {
            Polarization::Te => psi * (self.omega() * t).sin(),
            Polarization::Tm => psi * (self.omega() * t).cos(),
        }
    }

    /// In-plane field vector at `(x, y, t)`.
    pub fn in_plane_field(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let (_, (gx, gy)) = self.profile(x, y);
        let w = self.omega();
        let amp = match self.polarization {
            Polarization::Te => -(w * t).cos() / (self.epsilon * w),
            Polarization::Tm => -(w * t).sin() / (self.mu * w),
        };
        (amp * gy, -amp * gx)
    }

    /// Average tangential in-plane field along every edge at `t`
    /// (two-point Gauss rule).
    pub fn edge_cochain(&self, complex: &SimplicialSurface, t: f64) -> Vec<f64> {
        let g = 0.5 / 3f64.sqrt();
        let verts = complex.vertices();
        complex
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (verts[e.tail], verts[e.head]);
                let d = b - a;
                let len = d.norm();
                let (tx, ty) = (d.x / len, d.y / len);
                [0.5 - g, 0.5 + g]
                    .iter()
                    .map(|&s| {
                        let p = a + d * s;
                        let (u, v) = self.in_plane_field(p.x, p.y, t);
                        0.5 * (u * tx + v * ty)
                    })
                    .sum()
            })
            .collect()
    }

    /// Average normal field over every face at `t`, signed by the face
    /// normal. Each face is fanned from its circumcenter and every fan
    /// triangle integrated with the edge-midpoint rule.
    pub fn face_cochain(&self, complex: &SimplicialSurface, dual: &DualMesh, t: f64) -> Vec<f64> {
        let verts = complex.vertices();
        complex
            .faces()
            .iter()
            .enumerate()
            .map(|(f, face)| {
                let c = dual.circumcenters[f];
                let n = face.vertices.len();
                let mut integral = 0.0;
                let mut area = 0.0;
                for i in 0..n {
                    let (a, b) = (verts[face.vertices[i]], verts[face.vertices[(i + 1) % n]]);
                    let tri = 0.5 * ((a - c).cross(b - c)).norm();
                    let mids = [a.midpoint(b), b.midpoint(c), c.midpoint(a)];
                    let avg: f64 = mids
                        .iter()
                        .map(|p: &Point3| self.normal_field(p.x, p.y, t))
                        .sum::<f64>()
                        / 3.0;
                    integral += tri * avg;
                    area += tri;
                }
                dual.face_normals[f].z.signum() * integral / area
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_dual, generate, DualMode};

    fn laplacian_check(mode: &CavityMode, points: &[(f64, f64)]) {
        let h = 1e-4;
        for &(x, y) in points {
            let f = |x: f64, y: f64| mode.profile(x, y).0;
            let lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
            let scale = mode.wavenumber_squared() * 6.0;
            assert!(
                (lap + mode.wavenumber_squared() * f(x, y)).abs() < 1e-5 * scale,
                "at ({x}, {y})"
            );
            let (_, (gx, gy)) = mode.profile(x, y);
            assert!((gx - (f(x + h, y) - f(x - h, y)) / (2.0 * h)).abs() < 1e-6 * scale);
            assert!((gy - (f(x, y + h) - f(x, y - h)) / (2.0 * h)).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn rectangle_mode_frequency_and_phase() {
        let m = cavity_solution(Polarization::Te, 1, 1, 2.0, 2.0, 1.0, 1.0);
        assert!((m.omega() - PI * 2f64.sqrt() / 2.0).abs() < 1e-15);
        // face (normal) field vanishes at t = 0 in TE
        assert_eq!(m.normal_field(0.3, 0.7, 0.0), 0.0);
        let period = 2.0 * PI / m.omega();
        for &(x, y, t) in &[(0.3, 0.7, 0.1), (1.9, 0.2, 2.5)] {
            assert!((m.normal_field(x, y, t) - m.normal_field(x, y, t + period)).abs() < 1e-12);
            let (a, b) = (m.in_plane_field(x, y, t), m.in_plane_field(x, y, t + period));
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
        let tm = cavity_solution(Polarization::Tm, 2, 1, 1.0, 0.5, 2.0, 1.5);
        assert_eq!(tm.in_plane_field(0.3, 0.2, 0.0), (0.0, 0.0));
        laplacian_check(&tm, &[(0.3, 0.2), (0.7, 0.4)]);
    }

    #[test]
    fn triangle_modes_solve_the_eigenproblem_with_wall_conditions() {
        let s3 = 3f64.sqrt();
        let te = triangle_cavity_solution(Polarization::Te, 1, 0, 1.0, 1.0, 1.0);
        assert!((te.wavenumber_squared() - 16.0 * PI * PI / 9.0).abs() < 1e-12);
        let tm = triangle_cavity_solution(Polarization::Tm, 1, 2, 1.0, 1.0, 1.0);
        assert!((tm.wavenumber_squared() - 16.0 * PI * PI / 3.0).abs() < 1e-12);
        let inside = [(0.3, 0.2), (0.5, 0.5), (0.7, 0.1), (0.45, 0.7)];
        laplacian_check(&te, &inside);
        laplacian_check(&tm, &inside);

        // walls y = 0, y = sqrt(3) x, y = sqrt(3) (1 - x) with outward normals
        let walls = [
            ((0.0, 0.0), (1.0, 0.0), (0.0, -1.0)),
            ((0.0, 0.0), (0.5, 0.5 * s3), (-0.5 * s3, 0.5)),
            ((1.0, 0.0), (-0.5, 0.5 * s3), (0.5 * s3, 0.5)),
        ];
        let mut te_size: f64 = 0.0;
        let mut tm_size: f64 = 0.0;
        for &(x, y) in &inside {
            te_size = te_size.max(te.profile(x, y).0.abs());
            tm_size = tm_size.max(tm.profile(x, y).0.abs());
        }
        assert!(te_size > 0.1 && tm_size > 0.1, "modes must not vanish");
        for (origin, dir, n) in walls {
            for s in [0.1, 0.37, 0.8] {
                let (x, y) = (origin.0 + s * dir.0, origin.1 + s * dir.1);
                let (_, (gx, gy)) = te.profile(x, y);
                assert!((gx * n.0 + gy * n.1).abs() < 1e-12 * te_size * 10.0);
                assert!(tm.profile(x, y).0.abs() < 1e-12 * tm_size * 10.0);
            }
        }
    }

    #[test]
    fn cochains_of_constant_slices() {
        // TM at t = 0: edge field zero, face field the profile average
        let c = generate::quad_grid(4, 4, 0.25, 0.25);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let m = cavity_solution(Polarization::Tm, 1, 1, 1.0, 1.0, 1.0, 1.0);
        assert!(m.edge_cochain(&c, 0.0).iter().all(|&v| v == 0.0));
        let faces = m.face_cochain(&c, &d, 0.0);
        // exact average of sin(pi x) sin(pi y) over the first cell
        let avg1 = |a: f64, b: f64| ((PI * a).cos() - (PI * b).cos()) / (PI * (b - a));
        let exact = avg1(0.0, 0.25) * avg1(0.0, 0.25);
        assert!((faces[0] - exact).abs() < 2e-3 * exact);
        // tangential E on the PEC walls vanishes in TE
        let te = cavity_solution(Polarization::Te, 1, 1, 1.0, 1.0, 1.0, 1.0);
        let e = te.edge_cochain(&c, 0.3);
        for &b in c.boundary_edges() {
            assert!(e[b].abs() < 1e-15);
        }
    }
}
