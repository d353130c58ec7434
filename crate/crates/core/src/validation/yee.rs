//! Comparison of the assembled update coefficients on a uniform rectangular
//! grid against the classical Yee stencil written out by hand.

use std::collections::HashMap;

use super::ValidationError;
use crate::mesh::{build_dual, generate, DualMode};
use crate::solver::{cfl_dt, wave_speed, MaterialField, Polarization, Solver};

/// Medium used for the comparison: non-unit and lossy, so that every
/// coefficient depends on the material parameters.
const EPSILON: f64 = 2.0;
const MU: f64 = 0.75;
const SIGMA: f64 = 0.3;
const SIGMA_M: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YeeReport {
    pub te: f64,
    pub tm: f64,
    /// Number of coefficients compared per polarization.
    pub compared: usize,
}

impl YeeReport {
    pub fn max(&self) -> f64 {
        self.te.max(self.tm)
    }
}

/// A staggered Yee unknown: x-directed edge `(i + 1/2, j)`, y-directed
/// edge `(i, j + 1/2)` or cell `(i + 1/2, j + 1/2)`, in units of the
/// spacings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Cell {
    X(usize, usize),
    Y(usize, usize),
    Z(usize, usize),
}

#[derive(Default)]
struct Stencil {
    decay: HashMap<Cell, f64>,
    coupling: HashMap<Cell, Vec<(Cell, f64)>>,
}

/// `(decay, gain)` of the semi-implicit loss average.
fn lossy(inertia: f64, loss: f64, dt: f64) -> (f64, f64) {
    let r = loss * dt / (2.0 * inertia);
    ((1.0 - r) / (1.0 + r), dt / inertia / (1.0 + r))
}

/// Classical 2D Yee tables on an `n x n` grid for interior edges and all
/// cells.
///
/// TE: `eps dEx/dt = dHz/dy`, `eps dEy/dt = -dHz/dx`,
/// `mu dHz/dt = -(dEy/dx - dEx/dy)`.
/// TM (H on edges, E at cell centres): `mu dHx/dt = -dEz/dy`,
/// `mu dHy/dt = dEz/dx`, `eps dEz/dt = dHy/dx - dHx/dy`.
fn yee_stencil(polarization: Polarization, n: usize, hx: f64, hy: f64, dt: f64) -> Stencil {
    let (edge_medium, cell_medium, edge_sign) = match polarization {
        Polarization::Te => ((EPSILON, SIGMA), (MU, SIGMA_M), 1.0),
        Polarization::Tm => ((MU, SIGMA_M), (EPSILON, SIGMA), -1.0),
    };
    let (ed, eg) = lossy(edge_medium.0, edge_medium.1, dt);
    let (cd, cg) = lossy(cell_medium.0, cell_medium.1, dt);
    let cell_sign = -edge_sign;
    let mut s = Stencil::default();
    for i in 0..n {
        for j in 1..n {
            s.decay.insert(Cell::X(i, j), ed);
            s.coupling.insert(
                Cell::X(i, j),
                vec![
                    (Cell::Z(i, j), edge_sign * eg / hy),
                    (Cell::Z(i, j - 1), -edge_sign * eg / hy),
                ],
            );
        }
    }
    for i in 1..n {
        for j in 0..n {
            s.decay.insert(Cell::Y(i, j), ed);
            s.coupling.insert(
                Cell::Y(i, j),
                vec![
                    (Cell::Z(i, j), -edge_sign * eg / hx),
                    (Cell::Z(i - 1, j), edge_sign * eg / hx),
                ],
            );
        }
    }
    for i in 0..n {
        for j in 0..n {
            s.decay.insert(Cell::Z(i, j), cd);
            s.coupling.insert(
                Cell::Z(i, j),
                vec![
                    (Cell::Y(i + 1, j), cell_sign * cg / hx),
                    (Cell::Y(i, j), -cell_sign * cg / hx),
                    (Cell::X(i, j + 1), -cell_sign * cg / hy),
                    (Cell::X(i, j), cell_sign * cg / hy),
                ],
            );
        }
    }
    s
}

fn relative(found: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        found.abs()
    } else {
        ((found - expected) / expected).abs()
    }
}

/// Builds an `n x n` grid with spacings `hx`, `hy`, assembles both
/// polarizations at `0.9` of the CFL step and returns the largest relative
/// deviation of any decay or coupling coefficient from the Yee stencil.
/// Cells are matched by position, and the orientation of every edge and
/// face is folded into the expected sign. A DEC entry without a Yee
/// counterpart (or the reverse) counts as deviation 1.
pub fn yee_equivalence(n: usize, hx: f64, hy: f64) -> Result<YeeReport, ValidationError> {
    if n < 4 {
        return Err(ValidationError::InvalidSetup(format!("grid size {n} is below 4")));
    }
    if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
        return Err(ValidationError::InvalidSetup("spacings must be positive".into()));
    }
    let complex = generate::quad_grid(n, n, hx, hy);
    let dual = build_dual(&complex, DualMode::Strict)?;
    let verts = complex.vertices();

    // position -> Yee cell and orientation sign
    let index = |x: f64, h: f64| (x / h).round() as usize;
    let edge_cells: Vec<(Cell, f64)> = complex
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (verts[e.tail], verts[e.head]);
            let d = b - a;
            if d.y.abs() < 1e-9 * d.norm() {
                (Cell::X(index(a.x.min(b.x), hx), index(a.y, hy)), d.x.signum())
            } else {
                (Cell::Y(index(a.x, hx), index(a.y.min(b.y), hy)), d.y.signum())
            }
        })
        .collect();
    let face_cells: Vec<(Cell, f64)> = complex
        .faces()
        .iter()
        .enumerate()
        .map(|(f, face)| {
            let (mut x, mut y) = (f64::INFINITY, f64::INFINITY);
            for &v in &face.vertices {
                x = x.min(verts[v].x);
                y = y.min(verts[v].y);
            }
            (Cell::Z(index(x, hx), index(y, hy)), dual.face_normals[f].z.signum())
        })
        .collect();

    let mut deviations = [0.0f64; 2];
    let mut compared = 0;
    for (slot, pol) in [Polarization::Te, Polarization::Tm].into_iter().enumerate() {
        let materials = MaterialField::uniform(&complex, pol, EPSILON, MU, SIGMA, SIGMA_M)?;
        let dt = 0.9 * cfl_dt(&complex, &dual, wave_speed(&materials))?;
        let solver = Solver::new(&complex, &dual, &materials, dt)?;
        let coeffs = solver.coefficients();
        let yee = yee_stencil(pol, n, hx, hy, dt);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let mut check = |own: (Cell, f64), decay: f64, entries: Vec<((Cell, f64), f64)>| {
            let (cell, sign) = own;
            let (Some(&yd), Some(yc)) = (yee.decay.get(&cell), yee.coupling.get(&cell)) else {
                worst = worst.max(1.0);
                return;
            };
            worst = worst.max(relative(decay, yd));
            count += 1;
            if entries.len() != yc.len() {
                worst = worst.max(1.0);
            }
            for ((other, other_sign), k) in entries {
                match yc.iter().find(|(c, _)| *c == other) {
                    Some(&(_, ky)) => worst = worst.max(relative(k, sign * other_sign * ky)),
                    None => worst = worst.max(1.0),
                }
                count += 1;
            }
        };
        for e in 0..complex.n_edges() {
            if complex.is_boundary_edge(e) {
                continue;
            }
            let entries = coeffs.edge_coupling[e]
                .iter()
                .map(|&(f, k)| (face_cells[f], k))
                .collect();
            check(edge_cells[e], coeffs.edge_decay[e], entries);
        }
        for f in 0..complex.n_faces() {
            let entries = coeffs.face_coupling[f]
                .iter()
                .map(|&(e, k)| (edge_cells[e], k))
                .collect();
            check(face_cells[f], coeffs.face_decay[f], entries);
        }
        deviations[slot] = worst;
        compared = count;
    }
    Ok(YeeReport {
        te: deviations[0],
        tm: deviations[1],
        compared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_yee_on_square_and_anisotropic_grids() {
        for (n, hx, hy) in [(4, 1.0, 1.0), (8, 0.125, 0.125), (6, 0.1, 0.37)] {
            let r = yee_equivalence(n, hx, hy).unwrap();
            assert!(r.max() <= 1e-12, "{n} {hx} {hy}: {r:?}");
            // 4 edges per cell plus decays, interior edges with 2 faces
            let interior_edges = 2 * n * (n - 1);
            assert_eq!(r.compared, n * n * 5 + interior_edges * 3);
        }
    }

    #[test]
    fn deviation_does_not_depend_on_grid_size() {
        let a = yee_equivalence(8, 0.3, 0.2).unwrap();
        let b = yee_equivalence(16, 0.3, 0.2).unwrap();
        assert!((a.max() - b.max()).abs() <= 1e-14);
    }

    #[test]
    fn stencil_detects_a_wrong_sign() {
        let s = yee_stencil(Polarization::Te, 4, 1.0, 1.0, 0.1);
        let k = s.coupling[&Cell::X(1, 1)][0].1;
        assert!(relative(-k, k) > 1.0);
        assert!(yee_equivalence(3, 1.0, 1.0).is_err());
    }
}
