use super::{Polarization, SolverError};
use crate::mesh::SimplicialSurface;

/// Per-cell constitutive parameters. Which cells carry which parameter
/// depends on the polarization (see the module table).
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialField {
    polarization: Polarization,
    pub epsilon: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_m: Vec<f64>,
}

impl MaterialField {
    pub fn new(
        complex: &SimplicialSurface,
        polarization: Polarization,
        epsilon: Vec<f64>,
        mu: Vec<f64>,
        sigma: Vec<f64>,
        sigma_m: Vec<f64>,
    ) -> Result<Self, SolverError> {
        let (n_e, n_f) = (complex.n_edges(), complex.n_faces());
        let (n_electric, n_magnetic) = match polarization {
            Polarization::Te => (n_e, n_f),
            Polarization::Tm => (n_f, n_e),
        };
        for (what, v, n) in [
            ("epsilon", &epsilon, n_electric),
            ("sigma", &sigma, n_electric),
            ("mu", &mu, n_magnetic),
            ("sigma_m", &sigma_m, n_magnetic),
        ] {
            if v.len() != n {
                return Err(SolverError::LengthMismatch {
                    what,
                    expected: n,
                    found: v.len(),
                });
            }
        }
        for (values, positive) in [(&epsilon, true), (&mu, true), (&sigma, false), (&sigma_m, false)] {
            for (cell, &x) in values.iter().enumerate() {
                if !x.is_finite() {
                    return Err(SolverError::InvalidMaterial {
                        cell,
                        reason: "non-finite value",
                    });
                }
                if positive && x <= 0.0 {
                    return Err(SolverError::InvalidMaterial {
                        cell,
                        reason: "permittivity and permeability must be positive",
                    });
                }
                if !positive && x < 0.0 {
                    return Err(SolverError::InvalidMaterial {
                        cell,
                        reason: "conductivity must be non-negative",
                    });
                }
            }
        }
        Ok(Self {
            polarization,
            epsilon,
            mu,
            sigma,
            sigma_m,
        })
    }

    pub fn uniform(
        complex: &SimplicialSurface,
        polarization: Polarization,
        epsilon: f64,
        mu: f64,
        sigma: f64,
        sigma_m: f64,
    ) -> Result<Self, SolverError> {
        let (n_e, n_f) = (complex.n_edges(), complex.n_faces());
        let (n_electric, n_magnetic) = match polarization {
            Polarization::Te => (n_e, n_f),
            Polarization::Tm => (n_f, n_e),
        };
        Self::new(
            complex,
            polarization,
            vec![epsilon; n_electric],
            vec![mu; n_magnetic],
            vec![sigma; n_electric],
            vec![sigma_m; n_magnetic],
        )
    }

    /// Lossless vacuum in natural units.
    pub fn vacuum(complex: &SimplicialSurface, polarization: Polarization) -> Self {
        Self::uniform(complex, polarization, 1.0, 1.0, 0.0, 0.0).expect("unit vacuum is valid")
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    /// Inertia (epsilon or mu) of the field stored on edges.
    pub fn edge_inertia(&self) -> &[f64] {
        match self.polarization {
            Polarization::Te => &self.epsilon,
            Polarization::Tm => &self.mu,
        }
    }

    /// Conductivity (sigma or sigma_m) acting on the edge field.
    pub fn edge_loss(&self) -> &[f64] {
        match self.polarization {
            Polarization::Te => &self.sigma,
            Polarization::Tm => &self.sigma_m,
        }
    }

    pub fn face_inertia(&self) -> &[f64] {
        match self.polarization {
            Polarization::Te => &self.mu,
            Polarization::Tm => &self.epsilon,
        }
    }

    pub fn face_loss(&self) -> &[f64] {
        match self.polarization {
            Polarization::Te => &self.sigma_m,
            Polarization::Tm => &self.sigma,
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.sigma.iter().chain(&self.sigma_m).all(|&s| s == 0.0)
    }
}
