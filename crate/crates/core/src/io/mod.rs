//! File formats and the configured run pipeline: OFF/OBJ meshes in, TOML
//! run configuration, VTK frames and CSV probe tables out.

mod config;
mod mesh_file;
mod output;
mod pipeline;

use std::path::PathBuf;

use thiserror::Error;

use crate::mesh::MeshError;
use crate::solver::SolverError;

pub use config::{
    parse_config, parse_config_str, DualChoice, MaterialTable, MeshSection, OutputSection, PulseConfig, Region,
    RunConfig, RunSection, SourceSection, UnitSystem, EPSILON_0, MU_0,
};
pub use mesh_file::{load_mesh, parse_obj, parse_off, write_obj, write_off};
pub use output::{read_probes_csv, write_frame_vtk, write_probes_csv, ProbeTable};
pub use pipeline::{run_pipeline, PipelineSummary};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}:{line}: vertex index {index} out of range ({count} vertices)", path.display())]
    IndexOutOfRange {
        path: PathBuf,
        line: usize,
        index: i64,
        count: usize,
    },
    #[error("unsupported mesh format {} (expected .off or .obj)", path.display())]
    UnsupportedFormat { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Mesh {
        path: PathBuf,
        #[source]
        source: MeshError,
    },
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("csv error in {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl IoError {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            IoError::Solver(SolverError::NonFinite { .. } | SolverError::NoConvergence { .. })
        )
    }
}
