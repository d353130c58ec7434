use serde::{Deserialize, Serialize};

use super::{Polarization, SolverError};

/// Which current a source drives. The electric current lives on edges in TE
/// and on faces in TM; the magnetic current the other way round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTarget {
    Electric,
    Magnetic,
}

impl SourceTarget {
    fn on_edges(self, polarization: Polarization) -> bool {
        matches!(
            (self, polarization),
            (SourceTarget::Electric, Polarization::Te) | (SourceTarget::Magnetic, Polarization::Tm)
        )
    }
}

/// Time-dependent currents. Implementations add into the output slices,
/// which hold one entry per edge or per face.
pub trait CurrentSource {
    fn add_edge_current(&self, polarization: Polarization, t: f64, out: &mut [f64]);
    fn add_face_current(&self, polarization: Polarization, t: f64, out: &mut [f64]);

    /// True when the source never contributes, letting the stepper skip it.
    fn is_silent(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoSource;

impl CurrentSource for NoSource {
    fn add_edge_current(&self, _: Polarization, _: f64, _: &mut [f64]) {}
    fn add_face_current(&self, _: Polarization, _: f64, _: &mut [f64]) {}
    fn is_silent(&self) -> bool {
        true
    }
}

/// Soft source `amplitude * exp(-(t - t0)^2 / (2 width^2))` on one cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub cell: usize,
    pub target: SourceTarget,
    pub amplitude: f64,
    pub t0: f64,
    pub width: f64,
}

impl GaussianPulse {
    pub fn new(cell: usize, target: SourceTarget, amplitude: f64, t0: f64, width: f64) -> Result<Self, SolverError> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(SolverError::InvalidPulseWidth(width));
        }
        Ok(Self {
            cell,
            target,
            amplitude,
            t0,
            width,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = (t - self.t0) / self.width;
        self.amplitude * (-0.5 * s * s).exp()
    }
}

/// A set of Gaussian pulses.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceSpec {
    pulses: Vec<GaussianPulse>,
}

impl SourceSpec {
    /// Checks every pulse cell against the mesh sizes for `polarization`.
    pub fn new(
        pulses: Vec<GaussianPulse>,
        polarization: Polarization,
        n_edges: usize,
        n_faces: usize,
    ) -> Result<Self, SolverError> {
        for p in &pulses {
            if !(p.width > 0.0 && p.width.is_finite()) {
                return Err(SolverError::InvalidPulseWidth(p.width));
            }
            let (kind, count) = if p.target.on_edges(polarization) {
                ("edge", n_edges)
            } else {
                ("face", n_faces)
            };
            if p.cell >= count {
                return Err(SolverError::CellOutOfRange {
                    kind,
                    id: p.cell,
                    count,
                });
            }
        }
        Ok(Self { pulses })
    }

    pub fn pulses(&self) -> &[GaussianPulse] {
        &self.pulses
    }
}

impl CurrentSource for SourceSpec {
    fn add_edge_current(&self, polarization: Polarization, t: f64, out: &mut [f64]) {
        for p in self.pulses.iter().filter(|p| p.target.on_edges(polarization)) {
            out[p.cell] += p.value(t);
        }
    }

    fn add_face_current(&self, polarization: Polarization, t: f64, out: &mut [f64]) {
        for p in self.pulses.iter().filter(|p| !p.target.on_edges(polarization)) {
            out[p.cell] += p.value(t);
        }
    }

    fn is_silent(&self) -> bool {
        self.pulses.iter().all(|p| p.amplitude == 0.0)
    }
}

/// Instantaneous (edge, face) current arrays of `sources` at time `t`.
pub fn apply_gaussian_source(
    sources: &SourceSpec,
    polarization: Polarization,
    t: f64,
    n_edges: usize,
    n_faces: usize,
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let checked = SourceSpec::new(sources.pulses.clone(), polarization, n_edges, n_faces)?;
    let mut edge = vec![0.0; n_edges];
    let mut face = vec![0.0; n_faces];
    checked.add_edge_current(polarization, t, &mut edge);
    checked.add_face_current(polarization, t, &mut face);
    Ok((edge, face))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_peak_and_decay() {
        let p = GaussianPulse::new(0, SourceTarget::Electric, 2.5, 3.0, 0.4).unwrap();
        assert_eq!(p.value(3.0), 2.5);
        assert!(p.value(3.0 + 6.0 * 0.4) < 2.5 * 1e-7);
        assert!(p.value(3.0 - 6.0 * 0.4) < 2.5 * 1e-7);
        let z = GaussianPulse::new(0, SourceTarget::Electric, 0.0, 3.0, 0.4).unwrap();
        assert_eq!(z.value(3.0), 0.0);
        assert!(GaussianPulse::new(0, SourceTarget::Electric, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn currents_land_on_the_right_cells() {
        let je = GaussianPulse::new(2, SourceTarget::Electric, 1.0, 0.0, 1.0).unwrap();
        let jm = GaussianPulse::new(0, SourceTarget::Magnetic, -1.0, 0.0, 1.0).unwrap();
        let s = SourceSpec::new(vec![je, jm], Polarization::Te, 5, 2).unwrap();
        let (e, f) = apply_gaussian_source(&s, Polarization::Te, 0.0, 5, 2).unwrap();
        assert_eq!(e, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f, vec![-1.0, 0.0]);
        // in TM the electric current sits on face 2, which does not exist
        assert!(matches!(
            apply_gaussian_source(&s, Polarization::Tm, 0.0, 5, 2),
            Err(SolverError::CellOutOfRange {
                kind: "face",
                id: 2,
                ..
            })
        ));
    }
}
