use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dec_maxwell::io::{self, IoError};
use dec_maxwell::mesh::{self, build_dual, generate, DualMode};
use dec_maxwell::solver::{cfl_dt, spectral_dt_oracle, Polarization, SolverError};
use dec_maxwell::validation::{self as checks, ConvergenceConfig, InitialData, MeshFamily, Stability, ValidationError};

#[derive(Parser)]
#[command(
    name = "dec-maxwell",
    version,
    about = "Maxwell's equations on surfaces with discrete exterior calculus"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print size, topology and dual-quality statistics of a mesh.
    MeshInfo {
        mesh: PathBuf,
        /// Accept non-acute faces (reported as warnings).
        #[arg(long)]
        lenient: bool,
    },
    /// Print the CFL step bound and the spectral estimate.
    Dt {
        mesh: PathBuf,
        /// Wave speed.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Run a simulation described by a TOML configuration.
    Run { config: PathBuf },
    /// Run the built-in validation suites.
    Validate {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a convergence study described by a TOML file and print the table.
    Convergence {
        config: PathBuf,
        /// Also write the table as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Yee,
    Stability,
    Divergence,
    Convergence,
    Gauge,
}

/// Exit statuses.
const USAGE: u8 = 1;
const DATA: u8 = 2;
const NUMERICAL: u8 = 3;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = if e.is_numerical() { NUMERICAL } else { DATA };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ValidationError> for Failure {
    fn from(e: ValidationError) -> Self {
        let code = match &e {
            ValidationError::Unstable { .. }
            | ValidationError::Solver(SolverError::NonFinite { .. } | SolverError::NoConvergence { .. }) => NUMERICAL,
            _ => DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        ValidationError::from(e).into()
    }
}

fn data_error(message: String) -> Failure {
    Failure { code: DATA, message }
}

fn load(path: &Path, mode: DualMode) -> Result<(mesh::SimplicialSurface, mesh::DualMesh), Failure> {
    let complex = io::load_mesh(path)?;
    let dual = build_dual(&complex, mode).map_err(|e| data_error(format!("{}: {e}", path.display())))?;
    Ok((complex, dual))
}

fn mesh_info(path: &Path, lenient: bool) -> Result<(), Failure> {
    let mode = if lenient { DualMode::Lenient } else { DualMode::Strict };
    let (complex, dual) = load(path, mode)?;
    let q = mesh::mesh_quality(&complex, &dual);
    println!("vertices             {}", q.vertices);
    println!("edges                {}", q.edges);
    println!("faces                {}", q.faces);
    println!("euler characteristic {}", q.euler_characteristic);
    println!("closed               {}", q.closed);
    println!("boundary edges       {}", q.boundary_edges);
    println!(
        "edge length          {:e} .. {:e}",
        q.min_edge_length, q.max_edge_length
    );
    println!("min dual length      {:e}", q.min_dual_length);
    println!("non-acute faces      {}", q.non_acute_faces);
    println!("area                 {:e}", q.total_area);
    println!("dual area            {:e}", q.total_dual_area);
    for w in &dual.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn dt(path: &Path, c: f64) -> Result<(), Failure> {
    let (complex, dual) = load(path, DualMode::Strict)?;
    let bound = cfl_dt(&complex, &dual, c).map_err(|e| data_error(e.to_string()))?;
    let oracle = spectral_dt_oracle(&complex, &dual, c)?;
    println!("cfl_dt   {bound:.12e}");
    println!("spectral {oracle:.12e}");
    Ok(())
}

fn run(path: &Path) -> Result<(), Failure> {
    let config = io::parse_config(path)?;
    let summary = io::run_pipeline(&config)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} steps of dt = {:e} (limit {:e}) on {} faces",
        summary.n_steps, summary.dt, summary.cfl_dt, summary.n_faces
    );
    println!("probes: {}", summary.probes_csv.display());
    println!("frames: {}", summary.frames.len());
    Ok(())
}

fn convergence(path: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| data_error(format!("cannot read {}: {e}", path.display())))?;
    let config: ConvergenceConfig =
        toml::from_str(&text).map_err(|e| data_error(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
    let report = checks::convergence_study(&config)?;
    let mut table = String::from("spacing,dt,error\n");
    for ((h, dt), e) in report.resolutions.iter().zip(&report.time_steps).zip(&report.errors) {
        table += &format!("{h:.16e},{dt:.16e},{e:.16e}\n");
    }
    print!("{table}");
    println!("observed order {:.4}", report.observed_order);
    if let Some(out) = output {
        std::fs::write(out, &table).map_err(|e| data_error(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(())
}

/// One line per check; returns whether all passed.
fn report(name: &str, value: f64, pass: bool) -> bool {
    println!("{} {name}: {value:e}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn suite_yee() -> Result<bool, Failure> {
    let mut ok = true;
    for (n, hx, hy) in [(8, 0.125, 0.125), (32, 1.0 / 32.0, 1.0 / 32.0), (16, 0.1, 0.05)] {
        let d = checks::yee_equivalence(n, hx, hy)?.max();
        ok &= report(&format!("yee deviation {n}x{n} hx={hx} hy={hy}"), d, d <= 1e-12);
    }
    Ok(ok)
}

fn suite_stability(seed: u64) -> Result<bool, Failure> {
    let c = generate::equilateral_patch(16, 1.0);
    let d = build_dual(&c, DualMode::Strict).map_err(|e| data_error(e.to_string()))?;
    let r = checks::stability_probe(&c, &d, Polarization::Te, &[0.1, 0.99, 1.5], 10_000, seed)?;
    let mut ok = true;
    for &(f, s) in &r.outcomes {
        let expect_stable = f < 1.0;
        let stable = s == Stability::Stable;
        let step = match s {
            Stability::Stable => 10_000.0,
            Stability::Unstable { step } => step as f64,
        };
        ok &= report(
            &format!(
                "factor {f} {} (steps survived)",
                if stable { "stable" } else { "unstable" }
            ),
            step,
            stable == expect_stable,
        );
    }
    ok &= report("stability monotone in factor", 0.0, r.is_monotone());
    let g = generate::quad_grid(32, 32, 1.0 / 32.0, 1.0 / 32.0);
    let gd = build_dual(&g, DualMode::Strict).map_err(|e| data_error(e.to_string()))?;
    let (bound, oracle) = (cfl_dt(&g, &gd, 1.0)?, spectral_dt_oracle(&g, &gd, 1.0)?);
    let rel = (bound - oracle).abs() / oracle;
    ok &= report("cfl vs spectral estimate, 32x32 grid (relative)", rel, rel <= 0.05);
    Ok(ok)
}

fn suite_divergence(seed: u64) -> Result<bool, Failure> {
    let mut ok = true;
    for (name, c) in [
        ("icosphere", generate::icosphere(3, 1.0)),
        ("grid", generate::quad_grid(32, 32, 1.0 / 32.0, 1.0 / 32.0)),
    ] {
        let d = build_dual(&c, DualMode::Strict).map_err(|e| data_error(e.to_string()))?;
        for pol in [Polarization::Te, Polarization::Tm] {
            let r = checks::divergence_preservation(&c, &d, pol, InitialData::DivergenceFree, 10_000, seed)?;
            ok &= report(
                &format!("{name} {pol} relative divergence residual"),
                r.relative(),
                r.relative() <= 1e-12,
            );
        }
    }
    Ok(ok)
}

fn suite_convergence() -> Result<bool, Failure> {
    let quad = checks::convergence_study(&ConvergenceConfig::default())?;
    let tri = checks::convergence_study(&ConvergenceConfig {
        family: MeshFamily::UnstructuredTri,
        mode: (1, 0),
        ..ConvergenceConfig::default()
    })?;
    let mut ok = report(
        "quad order",
        quad.observed_order,
        (quad.observed_order - 2.0).abs() <= 0.2,
    );
    ok &= report("triangle order", tri.observed_order, tri.observed_order >= 0.8);
    Ok(ok)
}

fn suite_gauge(seed: u64) -> Result<bool, Failure> {
    let r = checks::variational_checks(100, 20, seed)?;
    let mut ok = report(
        "bianchi, integer potentials",
        r.bianchi_integer,
        r.bianchi_integer == 0.0,
    );
    ok &= report(
        "gauge invariance (relative)",
        r.gauge_relative,
        r.gauge_relative <= 1e-10,
    );
    ok &= report(
        "action gradient vs source residual (relative)",
        r.gradient_relative,
        r.gradient_relative <= 1e-5,
    );
    let c = generate::icosphere(2, 1.0);
    let d = build_dual(&c, DualMode::Strict).map_err(|e| data_error(e.to_string()))?;
    let t = checks::embedded_trajectory_check(&c, &d, 20, 0.9, seed)?;
    ok &= report(
        "embedded trajectory bianchi (relative)",
        t.bianchi / t.field_scale,
        t.bianchi <= 1e-11 * t.field_scale,
    );
    ok &= report(
        "embedded trajectory source (relative)",
        t.source / t.source_scale,
        t.source <= 1e-11 * t.source_scale,
    );
    Ok(ok)
}

fn validate(suite: Option<Suite>, seed: u64) -> Result<(), Failure> {
    let all = [
        Suite::Yee,
        Suite::Stability,
        Suite::Divergence,
        Suite::Convergence,
        Suite::Gauge,
    ];
    let mut ok = true;
    for s in all.into_iter().filter(|s| suite.is_none_or(|x| x == *s)) {
        ok &= match s {
            Suite::Yee => suite_yee()?,
            Suite::Stability => suite_stability(seed)?,
            Suite::Divergence => suite_divergence(seed)?,
            Suite::Convergence => suite_convergence()?,
            Suite::Gauge => suite_gauge(seed)?,
        };
    }
    if ok {
        Ok(())
    } else {
        Err(Failure {
            code: NUMERICAL,
            message: "validation checks failed".into(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::MeshInfo { mesh, lenient } => mesh_info(mesh, *lenient),
        Command::Dt { mesh, c } => dt(mesh, *c),
        Command::Run { config } => run(config),
        Command::Validate { suite, seed } => validate(*suite, *seed),
        Command::Convergence { config, output } => convergence(config, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
