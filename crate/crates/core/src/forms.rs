//! Discrete differential forms (cochains) on a surface and its circumcentric
//! dual.
//!
//! Primal `k`-forms store one value per `k`-cell. A dual `k`-form lives on
//! dual `k`-cells and is stored under the id of the primal `(2 - k)`-cell it
//! is dual to: dual 0-forms per face, dual 1-forms per edge, dual 2-forms per
//! vertex.
//!
//! The exterior derivative applies the transposed boundary tables, the dual
//! derivative applies them untransposed (the `d^T` of the source equation),
//! and the Hodge star is the diagonal ratio of dual to primal measures.

use thiserror::Error;

use crate::mesh::{DualMesh, SimplicialSurface};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("degree {degree} is out of range for this operation")]
    DegreeOutOfRange { degree: usize },
    #[error("expected a {expected:?} form, got a {found:?} form")]
    PlacementMismatch { expected: Placement, found: Placement },
    #[error("form has {found} values but the mesh has {expected} cells")]
    LengthMismatch { expected: usize, found: usize },
    #[error("forms of degree {left} and {right} cannot be paired")]
    DegreeMismatch { left: usize, right: usize },
    #[error("value at cell {cell} is not finite")]
    NonFinite { cell: usize },
    #[error("degree-{degree} Hodge weight of cell {cell} is zero")]
    ZeroMeasure { degree: usize, cell: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Primal,
    Dual,
}

/// Number of cells a form of this degree and placement is indexed by.
pub fn cell_count(complex: &SimplicialSurface, degree: usize, placement: Placement) -> Option<usize> {
    let primal_degree = match placement {
        Placement::Primal => degree,
        Placement::Dual => 2usize.checked_sub(degree)?,
    };
    match primal_degree {
        0 => Some(complex.n_vertices()),
        1 => Some(complex.n_edges()),
        2 => Some(complex.n_faces()),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteForm {
    degree: usize,
    placement: Placement,
    values: Vec<f64>,
}

impl DiscreteForm {
    pub fn new(
        complex: &SimplicialSurface,
        degree: usize,
        placement: Placement,
        values: Vec<f64>,
    ) -> Result<Self, FormError> {
        let expected = cell_count(complex, degree, placement).ok_or(FormError::DegreeOutOfRange { degree })?;
        if values.len() != expected {
            return Err(FormError::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(FormError::NonFinite { cell });
        }
        Ok(Self {
            degree,
            placement,
            values,
        })
    }

    pub fn primal(complex: &SimplicialSurface, degree: usize, values: Vec<f64>) -> Result<Self, FormError> {
        Self::new(complex, degree, Placement::Primal, values)
    }

    pub fn dual(complex: &SimplicialSurface, degree: usize, values: Vec<f64>) -> Result<Self, FormError> {
        Self::new(complex, degree, Placement::Dual, values)
    }

    pub fn zeros(complex: &SimplicialSurface, degree: usize, placement: Placement) -> Result<Self, FormError> {
        let n = cell_count(complex, degree, placement).ok_or(FormError::DegreeOutOfRange { degree })?;
        Ok(Self {
            degree,
            placement,
            values: vec![0.0; n],
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &DiscreteForm, beta: f64) -> Result<DiscreteForm, FormError> {
        self.check_same_kind(other)?;
        Ok(Self {
            degree: self.degree,
            placement: self.placement,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> DiscreteForm {
        Self {
            values: self.values.iter().map(|v| alpha * v).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_same_kind(&self, other: &DiscreteForm) -> Result<(), FormError> {
        if self.placement != other.placement {
            return Err(FormError::PlacementMismatch {
                expected: self.placement,
                found: other.placement,
            });
        }
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        if self.values.len() != other.values.len() {
            return Err(FormError::LengthMismatch {
                expected: self.values.len(),
                found: other.values.len(),
            });
        }
        Ok(())
    }
}

fn expect_placement(form: &DiscreteForm, placement: Placement) -> Result<(), FormError> {
    if form.placement != placement {
        return Err(FormError::PlacementMismatch {
            expected: placement,
            found: form.placement,
        });
    }
    Ok(())
}

fn check_len(complex: &SimplicialSurface, form: &DiscreteForm) -> Result<(), FormError> {
    let expected =
        cell_count(complex, form.degree, form.placement).ok_or(FormError::DegreeOutOfRange { degree: form.degree })?;
    if form.values.len() != expected {
        return Err(FormError::LengthMismatch {
            expected,
            found: form.values.len(),
        });
    }
    Ok(())
}

/// Primal `d`: `k`-form to `(k + 1)`-form, `k` in `{0, 1}`.
pub fn exterior_derivative(form: &DiscreteForm, complex: &SimplicialSurface) -> Result<DiscreteForm, FormError> {
    expect_placement(form, Placement::Primal)?;
    check_len(complex, form)?;
    let values = match form.degree {
        0 => complex.boundary1().apply(&form.values),
        1 => complex.boundary2().apply(&form.values),
        degree => return Err(FormError::DegreeOutOfRange { degree }),
    };
    Ok(DiscreteForm {
        degree: form.degree + 1,
        placement: Placement::Primal,
        values,
    })
}

/// Dual derivative `d^T`: dual `k`-form to dual `(k + 1)`-form, `k` in `{0, 1}`.
///
/// A dual 0-form (per face) maps to a dual 1-form (per edge) through the
/// transpose of the face-edge incidence, so `(d^T H)_e = H_{f+} - H_{f-}`
/// for the faces inducing `+1` and `-1` on `e`.
pub fn exterior_derivative_dual(form: &DiscreteForm, complex: &SimplicialSurface) -> Result<DiscreteForm, FormError> {
    expect_placement(form, Placement::Dual)?;
    check_len(complex, form)?;
    let values = match form.degree {
        0 => complex.boundary2().apply_transpose(&form.values),
        1 => complex.boundary1().apply_transpose(&form.values),
        degree => return Err(FormError::DegreeOutOfRange { degree }),
    };
    Ok(DiscreteForm {
        degree: form.degree + 1,
        placement: Placement::Dual,
        values,
    })
}

/// Diagonal Hodge weights for primal `degree`-forms: `|*v|`, `|*e|/|e|`, `1/|P|`.
pub fn hodge_weights(degree: usize, dual: &DualMesh) -> Result<Vec<f64>, FormError> {
    match degree {
        0 => Ok(dual.dual_vertex_areas.clone()),
        1 => Ok(dual
            .dual_edge_lengths
            .iter()
            .zip(&dual.edge_lengths)
            .map(|(d, l)| d / l)
            .collect()),
        2 => Ok(dual.face_areas.iter().map(|a| 1.0 / a).collect()),
        degree => Err(FormError::DegreeOutOfRange { degree }),
    }
}

fn checked_weights(degree: usize, dual: &DualMesh, len: usize) -> Result<Vec<f64>, FormError> {
    let w = hodge_weights(degree, dual)?;
    if w.len() != len {
        return Err(FormError::LengthMismatch {
            expected: w.len(),
            found: len,
        });
    }
    if let Some(cell) = w.iter().position(|&x| x == 0.0 || !x.is_finite()) {
        return Err(FormError::ZeroMeasure { degree, cell });
    }
    Ok(w)
}

/// Primal `k`-form to dual `(2 - k)`-form.
pub fn hodge(form: &DiscreteForm, dual: &DualMesh) -> Result<DiscreteForm, FormError> {
    expect_placement(form, Placement::Primal)?;
    let w = checked_weights(form.degree, dual, form.values.len())?;
    Ok(DiscreteForm {
        degree: 2 - form.degree,
        placement: Placement::Dual,
        values: form.values.iter().zip(&w).map(|(v, w)| v * w).collect(),
    })
}

/// Dual `k`-form to primal `(2 - k)`-form; exact inverse of [`hodge`].
pub fn hodge_inverse(form: &DiscreteForm, dual: &DualMesh) -> Result<DiscreteForm, FormError> {
    expect_placement(form, Placement::Dual)?;
    let degree = 2usize
        .checked_sub(form.degree)
        .ok_or(FormError::DegreeOutOfRange { degree: form.degree })?;
    let w = checked_weights(degree, dual, form.values.len())?;
    Ok(DiscreteForm {
        degree,
        placement: Placement::Primal,
        values: form.values.iter().zip(&w).map(|(v, w)| v / w).collect(),
    })
}

/// `delta = hodge_inverse . d^T . hodge`, primal `k`-form to `(k - 1)`-form.
pub fn codifferential(
    form: &DiscreteForm,
    complex: &SimplicialSurface,
    dual: &DualMesh,
) -> Result<DiscreteForm, FormError> {
    expect_placement(form, Placement::Primal)?;
    if !(1..=2).contains(&form.degree) {
        return Err(FormError::DegreeOutOfRange { degree: form.degree });
    }
    let starred = hodge(form, dual)?;
    let differentiated = exterior_derivative_dual(&starred, complex)?;
    hodge_inverse(&differentiated, dual)
}

/// Hodge inner product `sum_cells a * b * weight` of two primal forms.
pub fn inner_product(a: &DiscreteForm, b: &DiscreteForm, dual: &DualMesh) -> Result<f64, FormError> {
    expect_placement(a, Placement::Primal)?;
    a.check_same_kind(b)?;
    let w = hodge_weights(a.degree, dual)?;
    if w.len() != a.values.len() {
        return Err(FormError::LengthMismatch {
            expected: w.len(),
            found: a.values.len(),
        });
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .zip(&w)
        .map(|((x, y), w)| x * y * w)
        .sum())
}
