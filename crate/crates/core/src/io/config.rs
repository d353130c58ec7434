//! TOML run configuration.
//!
//! ```toml
//! [mesh]
//! path = "sphere.off"        # required, relative to the config file
//! dual = "strict"            # "strict" (default) or "lenient"
//!
//! [materials]                # background medium, defaults shown
//! epsilon = 1.0
//! mu = 1.0
//! sigma = 0.0
//! sigma_m = 0.0
//!
//! [[materials.region]]       # any number; later regions win
//! min = [0.0, 0.0, -1.0]
//! max = [0.5, 1.0, 1.0]
//! epsilon = 4.0              # unset ones fall through to earlier regions
//!
//! [[sources.pulse]]          # any number
//! cell = 12
//! target = "magnetic"        # or "electric"
//! amplitude = 1.0            # default 1
//! t0 = 0.5
//! width = 0.1
//!
//! [run]
//! polarization = "TE"        # required, "TE" or "TM"
//! n_steps = 1000             # required
//! units = "natural"          # or "si" (relative epsilon and mu, seconds)
//! cfl_safety = 0.99          # dt = cfl_safety * CFL limit, in (0, 1]
//! # dt = 0.01                # explicit step; overrides cfl_safety
//! probes = ["face0", "edge3"]
//! frame_stride = 10
//! seed = 0                   # recorded only; the solver is deterministic
//!
//! [output]
//! directory = "output"       # relative to the config file
//! frames = true              # write VTK frames
//! probes_file = "probes.csv"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use super::IoError;
use crate::mesh::{DualMode, Point3, SimplicialSurface};
use crate::solver::{GaussianPulse, MaterialField, Polarization, Probe, SourceSpec, SourceTarget};

/// Vacuum permittivity and permeability (F/m, H/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const MU_0: f64 = 1.256_637_062_12e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    /// `epsilon_0 = mu_0 = c = 1`.
    #[default]
    Natural,
    /// Material values are relative to vacuum; times are in seconds.
    #[serde(alias = "SI")]
    Si,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualChoice {
    #[default]
    Strict,
    Lenient,
}

impl From<DualChoice> for DualMode {
    fn from(c: DualChoice) -> Self {
        match c {
            DualChoice::Strict => DualMode::Strict,
            DualChoice::Lenient => DualMode::Lenient,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub path: PathBuf,
    #[serde(default)]
    pub dual: DualChoice,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub epsilon: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma_m: Option<f64>,
}

impl Region {
    fn contains(&self, p: Point3) -> bool {
        let q = [p.x, p.y, p.z];
        (0..3).all(|i| self.min[i] <= q[i] && q[i] <= self.max[i])
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialTable {
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub sigma_m: f64,
    #[serde(default, rename = "region")]
    pub regions: Vec<Region>,
}

fn one() -> f64 {
    1.0
}

impl Default for MaterialTable {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            mu: 1.0,
            sigma: 0.0,
            sigma_m: 0.0,
            regions: Vec::new(),
        }
    }
}

impl MaterialTable {
    /// Per-cell parameters: electric ones on the cells carrying E, magnetic
    /// ones on the cells carrying H, each cell classified by its edge
    /// midpoint or face vertex centroid.
    pub fn assign(
        &self,
        complex: &SimplicialSurface,
        polarization: Polarization,
        units: UnitSystem,
    ) -> Result<MaterialField, IoError> {
        let (e0, m0) = match units {
            UnitSystem::Natural => (1.0, 1.0),
            UnitSystem::Si => (EPSILON_0, MU_0),
        };
        let verts = complex.vertices();
        let edge_pos: Vec<Point3> = complex
            .edges()
            .iter()
            .map(|e| verts[e.tail].midpoint(verts[e.head]))
            .collect();
        let face_pos: Vec<Point3> = complex
            .faces()
            .iter()
            .map(|f| {
                let sum = f.vertices.iter().fold(Point3::ZERO, |s, &v| s + verts[v]);
                sum / f.vertices.len() as f64
            })
            .collect();
        let (electric, magnetic) = match polarization {
            Polarization::Te => (&edge_pos, &face_pos),
            Polarization::Tm => (&face_pos, &edge_pos),
        };
        let pick = |p: Point3, background: f64, get: fn(&Region) -> Option<f64>| {
            self.regions
                .iter()
                .rev()
                .find_map(|r| if r.contains(p) { get(r) } else { None })
                .unwrap_or(background)
        };
        let epsilon = electric
            .iter()
            .map(|&p| e0 * pick(p, self.epsilon, |r| r.epsilon))
            .collect();
        let sigma = electric.iter().map(|&p| pick(p, self.sigma, |r| r.sigma)).collect();
        let mu = magnetic.iter().map(|&p| m0 * pick(p, self.mu, |r| r.mu)).collect();
        let sigma_m = magnetic.iter().map(|&p| pick(p, self.sigma_m, |r| r.sigma_m)).collect();
        Ok(MaterialField::new(complex, polarization, epsilon, mu, sigma, sigma_m)?)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub cell: usize,
    pub target: SourceTarget,
    #[serde(default = "one")]
    pub amplitude: f64,
    pub t0: f64,
    pub width: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    #[serde(default, rename = "pulse")]
    pub pulses: Vec<PulseConfig>,
}

impl SourceSection {
    pub fn build(&self, complex: &SimplicialSurface, polarization: Polarization) -> Result<SourceSpec, IoError> {
        let pulses = self
            .pulses
            .iter()
            .map(|p| GaussianPulse::new(p.cell, p.target, p.amplitude, p.t0, p.width))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SourceSpec::new(
            pulses,
            polarization,
            complex.n_edges(),
            complex.n_faces(),
        )?)
    }
}

fn probes<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Probe>, D::Error> {
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub polarization: Polarization,
    pub n_steps: u64,
    #[serde(default)]
    pub units: UnitSystem,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default, deserialize_with = "probes")]
    pub probes: Vec<Probe>,
    #[serde(default = "default_stride")]
    pub frame_stride: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_safety() -> f64 {
    0.99
}

fn default_stride() -> u64 {
    10
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub frames: bool,
    #[serde(default = "default_probes_file")]
    pub probes_file: String,
}

fn default_directory() -> PathBuf {
    PathBuf::from("output")
}

fn yes() -> bool {
    true
}

fn default_probes_file() -> String {
    "probes.csv".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            frames: true,
            probes_file: default_probes_file(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSection,
    #[serde(default)]
    pub materials: MaterialTable,
    #[serde(default)]
    pub sources: SourceSection,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    /// Range checks that the schema cannot express.
    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: String| Err(IoError::InvalidConfig(m));
        let run = &self.run;
        match run.dt {
            Some(dt) if !(dt > 0.0 && dt.is_finite()) => return bad(format!("run.dt = {dt} must be positive")),
            Some(_) => {}
            None if !(run.cfl_safety > 0.0 && run.cfl_safety <= 1.0) => {
                return bad(format!(
                    "run.cfl_safety = {} must lie in (0, 1] unless run.dt is given",
                    run.cfl_safety
                ))
            }
            None => {}
        }
        if run.frame_stride == 0 {
            return bad("run.frame_stride must be at least 1".into());
        }
        let m = &self.materials;
        let media = std::iter::once((m.epsilon, m.mu, m.sigma, m.sigma_m, "background".to_string())).chain(
            m.regions.iter().enumerate().map(|(i, r)| {
                (
                    r.epsilon.unwrap_or(1.0),
                    r.mu.unwrap_or(1.0),
                    r.sigma.unwrap_or(0.0),
                    r.sigma_m.unwrap_or(0.0),
                    format!("region {i}"),
                )
            }),
        );
        for (eps, mu, s, sm, name) in media {
            if !(eps > 0.0 && mu > 0.0 && eps.is_finite() && mu.is_finite()) {
                return bad(format!("{name}: epsilon and mu must be positive"));
            }
            if !(s >= 0.0 && sm >= 0.0 && s.is_finite() && sm.is_finite()) {
                return bad(format!("{name}: conductivities must be non-negative"));
            }
        }
        for (i, r) in m.regions.iter().enumerate() {
            if (0..3).any(|k| r.min[k] > r.max[k]) {
                return bad(format!("region {i}: min exceeds max"));
            }
        }
        for (i, p) in self.sources.pulses.iter().enumerate() {
            if !(p.width > 0.0 && p.width.is_finite()) {
                return bad(format!("pulse {i}: width must be positive"));
            }
        }
        Ok(())
    }

    /// Rebases relative mesh and output paths onto `dir`.
    fn resolve(&mut self, dir: &Path) {
        if self.mesh.path.is_relative() {
            self.mesh.path = dir.join(&self.mesh.path);
        }
        if self.output.directory.is_relative() {
            self.output.directory = dir.join(&self.output.directory);
        }
    }
}

/// Parses and validates configuration text; relative paths are resolved
/// against `base_dir`.
pub fn parse_config_str(text: &str, origin: &Path, base_dir: &Path) -> Result<RunConfig, IoError> {
    let mut config: RunConfig = toml::from_str(text).map_err(|e| IoError::Config {
        path: origin.to_owned(),
        message: e.to_string().trim_end().to_string(),
    })?;
    config.validate()?;
    config.resolve(base_dir);
    Ok(config)
}

/// Reads a run configuration; paths inside are relative to its directory.
pub fn parse_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, path, dir)
}
