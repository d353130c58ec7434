use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MaterialField, SolverError};
use crate::mesh::{DualMesh, SimplicialSurface};

/// Slowest-medium wave speed `1 / sqrt(min eps * min mu)`, which gives the
/// most conservative step bound over the mesh.
pub fn wave_speed(materials: &MaterialField) -> f64 {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    1.0 / (min(&materials.epsilon) * min(&materials.mu)).sqrt()
}

fn check_speed(c: f64) -> Result<(), SolverError> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(SolverError::InvalidWaveSpeed(c))
    }
}

fn positive_dual_lengths(dual: &DualMesh) -> Result<(), SolverError> {
    match dual.dual_edge_lengths.iter().position(|&l| !(l > 0.0)) {
        Some(edge) => Err(SolverError::NonPositiveDualLength {
            edge,
            length: dual.dual_edge_lengths[edge],
        }),
        None => Ok(()),
    }
}

/// Ratio `|e| / |*e|` as seen from the face-based wave operator. A boundary
/// edge only carries the truncated half of its dual edge, so it enters with
/// the mirrored length `2 |*e|`.
fn edge_ratio(complex: &SimplicialSurface, dual: &DualMesh, e: usize) -> f64 {
    let star = if complex.is_boundary_edge(e) {
        2.0 * dual.dual_edge_lengths[e]
    } else {
        dual.dual_edge_lengths[e]
    };
    dual.edge_lengths[e] / star
}

/// Largest stable leapfrog step: the minimum over faces of
/// `(1/c) sqrt(2 |P| / sum_e |e|/|*e|)`.
pub fn cfl_dt(complex: &SimplicialSurface, dual: &DualMesh, c: f64) -> Result<f64, SolverError> {
    check_speed(c)?;
    positive_dual_lengths(dual)?;
    let mut dt = f64::INFINITY;
    for (f, face) in complex.faces().iter().enumerate() {
        let sum: f64 = face.edges.iter().map(|&(e, _)| edge_ratio(complex, dual, e)).sum();
        dt = dt.min((2.0 * dual.face_areas[f] / sum).sqrt() / c);
    }
    Ok(dt)
}

const ORACLE_TOLERANCE: f64 = 1e-10;
const ORACLE_MAX_ITERATIONS: usize = 200_000;

/// Independent step bound `2 / sqrt(lambda_max)` from power iteration on
/// the face-based wave operator
/// `(L x)_f = (c^2 / |P_f|) sum_e (|e| / |*e|) (x_f - x_neighbour)`,
/// with the neighbour across a boundary edge held at zero.
///
/// The iteration runs on the symmetrized operator `S^(1/2) L S^(-1/2)`,
/// `S = diag(|P|)`, from a fixed pseudo-random start, and stops once the
/// Rayleigh quotient settles to a relative `1e-10`.
pub fn spectral_dt_oracle(complex: &SimplicialSurface, dual: &DualMesh, c: f64) -> Result<f64, SolverError> {
    check_speed(c)?;
    positive_dual_lengths(dual)?;
    let n = complex.n_faces();
    let sqrt_area: Vec<f64> = dual.face_areas.iter().map(|a| a.sqrt()).collect();
    // (edge weight, face a, optional face b)
    let links: Vec<(f64, usize, Option<usize>)> = (0..complex.n_edges())
        .map(|e| {
            let w = c * c * dual.edge_lengths[e] / dual.dual_edge_lengths[e];
            let faces = complex.edge_faces(e);
            (w, faces[0].0, faces.get(1).map(|&(f, _)| f))
        })
        .collect();
    let apply = |y: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(w, a, b) in &links {
            match b {
                Some(b) => {
                    let (xa, xb) = (y[a] / sqrt_area[a], y[b] / sqrt_area[b]);
                    out[a] += w * (xa - xb) / sqrt_area[a];
                    out[b] += w * (xb - xa) / sqrt_area[b];
                }
                None => out[a] += w * y[a] / (sqrt_area[a] * sqrt_area[a]),
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut ly = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..ORACLE_MAX_ITERATIONS {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        apply(&y, &mut ly);
        let next: f64 = y.iter().zip(&ly).map(|(a, b)| a * b).sum();
        if next > 0.0 && (next - lambda).abs() <= ORACLE_TOLERANCE * next {
            return Ok(2.0 / next.sqrt());
        }
        lambda = next;
        std::mem::swap(&mut y, &mut ly);
    }
    Err(SolverError::NoConvergence {
        iterations: ORACLE_MAX_ITERATIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_dual, generate, DualMode};
    use crate::solver::Polarization;

    fn dual(c: &SimplicialSurface) -> DualMesh {
        build_dual(c, DualMode::Strict).unwrap()
    }

    #[test]
    fn square_grid_matches_yee_bound() {
        let h = 0.125;
        let c = generate::quad_grid(8, 8, h, h);
        let dt = cfl_dt(&c, &dual(&c), 2.0).unwrap();
        let expected = h / (2.0 * 2f64.sqrt());
        assert!((dt - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn equilateral_mesh_bound() {
        let a = 0.25;
        let c = generate::equilateral_patch(4, 1.0);
        let dt = cfl_dt(&c, &dual(&c), 1.0).unwrap();
        let expected = a / 6f64.sqrt();
        assert!((dt - expected).abs() <= 1e-12 * expected);
        let ico = generate::icosahedron(1.0);
        let d = dual(&ico);
        let dt = cfl_dt(&ico, &d, 1.0).unwrap();
        assert!((dt - d.edge_lengths[0] / 6f64.sqrt()).abs() <= 1e-12 * dt);
    }

    #[test]
    fn scaling_is_exact() {
        let c = generate::jittered_equilateral(6, 1.0, 0.3, 7);
        let s = 3.5;
        let big = c.map_vertices(|p| p * s);
        let a = cfl_dt(&c, &dual(&c), 1.0).unwrap();
        let b = cfl_dt(&big, &dual(&big), 1.0).unwrap();
        assert!((b - s * a).abs() <= 1e-13 * b);
        let a = spectral_dt_oracle(&c, &dual(&c), 1.0).unwrap();
        let b = spectral_dt_oracle(&big, &dual(&big), 1.0).unwrap();
        assert!((b - s * a).abs() <= 1e-6 * b);
    }

    #[test]
    fn oracle_on_single_face_and_small_grid() {
        let c = generate::quad_grid(1, 1, 1.0, 1.0);
        let dt = spectral_dt_oracle(&c, &dual(&c), 1.0).unwrap();
        // one face, four walls at distance 1/2: lambda = 4 * (1 / 0.5) / 1
        assert!((dt - 2.0 / 8f64.sqrt()).abs() < 1e-9);
        let c = generate::quad_grid(8, 8, 0.5, 0.5);
        let d = dual(&c);
        let oracle = spectral_dt_oracle(&c, &d, 1.0).unwrap();
        let bound = cfl_dt(&c, &d, 1.0).unwrap();
        assert!((oracle - bound).abs() <= 0.05 * bound);
    }

    #[test]
    fn wave_speed_uses_slowest_medium() {
        let c = generate::quad_grid(2, 1, 1.0, 1.0);
        let mut m = MaterialField::uniform(&c, Polarization::Te, 4.0, 9.0, 0.0, 0.0).unwrap();
        m.epsilon[0] = 5.0;
        m.mu[1] = 2.25;
        assert!((wave_speed(&m) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let c = generate::quad_grid(1, 1, 1.0, 1.0);
        let mut d = dual(&c);
        assert!(cfl_dt(&c, &d, 0.0).is_err());
        d.dual_edge_lengths[0] = -0.1;
        assert!(matches!(
            cfl_dt(&c, &d, 1.0),
            Err(SolverError::NonPositiveDualLength { edge: 0, .. })
        ));
    }
}
