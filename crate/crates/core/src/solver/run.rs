use std::fmt;
use std::str::FromStr;

use super::stability::{cfl_dt, wave_speed};
use super::{CurrentSource, MaterialField, SimState, Solver, SolverError};
use crate::mesh::{DualMesh, SimplicialSurface};

/// A cell whose value is recorded every step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    Edge(usize),
    Face(usize),
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::Edge(e) => write!(f, "edge{e}"),
            Probe::Face(p) => write!(f, "face{p}"),
        }
    }
}

impl FromStr for Probe {
    type Err = String;

    /// Accepts `edge12`, `edge:12`, `face3`, `face:3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |rest: &str| {
            rest.trim_start_matches(':')
                .parse::<usize>()
                .map_err(|_| format!("invalid probe `{s}`"))
        };
        if let Some(rest) = s.strip_prefix("edge") {
            parse(rest).map(Probe::Edge)
        } else if let Some(rest) = s.strip_prefix("face") {
            parse(rest).map(Probe::Face)
        } else {
            Err(format!("invalid probe `{s}` (expected edge<id> or face<id>)"))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunParams {
    pub dt: f64,
    pub n_steps: u64,
    pub probes: Vec<Probe>,
    pub frame_stride: u64,
}

/// Full-field snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub step: u64,
    pub time: f64,
    pub edge_field: Vec<f64>,
    pub face_field: Vec<f64>,
}

impl From<&SimState> for Frame {
    fn from(state: &SimState) -> Self {
        Self {
            step: state.step,
            time: state.face_time(),
            edge_field: state.edge_field.clone(),
            face_field: state.face_field.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub probes: Vec<Probe>,
    /// One row per completed step: `(step, face time, probe values)`.
    pub series: Vec<(u64, f64, Vec<f64>)>,
    pub frames: Vec<Frame>,
    pub final_state: SimState,
    pub warnings: Vec<String>,
}

/// Advances `params.n_steps` leapfrog steps from `initial` (zero fields
/// when `None`). Frame 0 is always emitted, then every `frame_stride` steps.
pub fn run(
    complex: &SimplicialSurface,
    dual: &DualMesh,
    materials: &MaterialField,
    sources: &dyn CurrentSource,
    initial: Option<SimState>,
    params: &RunParams,
) -> Result<RunOutput, SolverError> {
    if params.frame_stride == 0 {
        return Err(SolverError::InvalidFrameStride);
    }
    for p in &params.probes {
        let (kind, id, count) = match *p {
            Probe::Edge(e) => ("edge", e, complex.n_edges()),
            Probe::Face(f) => ("face", f, complex.n_faces()),
        };
        if id >= count {
            return Err(SolverError::CellOutOfRange { kind, id, count });
        }
    }
    let solver = Solver::new(complex, dual, materials, params.dt)?;
    let mut warnings = Vec::new();
    match cfl_dt(complex, dual, wave_speed(materials)) {
        Ok(limit) if params.dt > limit => {
            let w = format!(
                "dt = {:e} exceeds the stability limit {:e}; the run may blow up",
                params.dt, limit
            );
            log::warn!("{w}");
            warnings.push(w);
        }
        Ok(_) => {}
        Err(e) => {
            let w = format!("stability limit unavailable: {e}");
            log::warn!("{w}");
            warnings.push(w);
        }
    }

    let mut state = match initial {
        Some(s) => {
            solver.check(&s)?;
            s
        }
        None => solver.zero_state(),
    };
    let mut frames = vec![Frame::from(&state)];
    let mut series = Vec::with_capacity(params.n_steps as usize);
    for _ in 0..params.n_steps {
        solver.step(&mut state, sources)?;
        let values = params
            .probes
            .iter()
            .map(|p| match *p {
                Probe::Edge(e) => state.edge_field[e],
                Probe::Face(f) => state.face_field[f],
            })
            .collect();
        series.push((state.step, state.face_time(), values));
        if state.step % params.frame_stride == 0 {
            frames.push(Frame::from(&state));
        }
    }
    Ok(RunOutput {
        probes: params.probes.clone(),
        series,
        frames,
        final_state: state,
        warnings,
    })
}
