//! Acceptance gate: the nine release criteria, each with its tolerance and
//! runtime budget. Prints one PASS/FAIL line per criterion.

use std::f64::consts::SQRT_2;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dec_maxwell::io::{parse_config, read_probes_csv, run_pipeline, write_off};
use dec_maxwell::mesh::{build_dual, generate, DualMesh, DualMode, Incidence, SimplicialSurface};
use dec_maxwell::solver::{cfl_dt, spectral_dt_oracle, Polarization};
use dec_maxwell::validation::{
    convergence_study, divergence_preservation, embedded_trajectory_check, energy_trace, stability_probe,
    variational_checks, yee_equivalence, ConvergenceConfig, InitialData, MeshFamily, Stability,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn dual(c: &SimplicialSurface) -> DualMesh {
    build_dual(c, DualMode::Strict).expect("acute test mesh")
}

/// `inner` then `outer` applied to an integer cochain, in i64.
fn apply_twice(outer: &Incidence, inner: &Incidence, x: &[i64]) -> Vec<i64> {
    let mid: Vec<i64> = inner
        .rows()
        .map(|row| row.iter().map(|&(c, s)| i64::from(s) * x[c]).sum())
        .collect();
    outer
        .rows()
        .map(|row| row.iter().map(|&(c, s)| i64::from(s) * mid[c]).sum())
        .collect()
}

fn exact_complex() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut nonzero = 0usize;
    let mut worst = 0i64;
    let meshes = [generate::random_triangulation(10, 42), generate::icosphere(3, 1.0)];
    assert_eq!(meshes[0].n_faces(), 200);
    for c in &meshes {
        let (b1, b2) = (c.boundary1(), c.boundary2());
        let (t1, t2) = (b1.transpose(), b2.transpose());
        nonzero += b2.compose(b1).len() + t1.compose(&t2).len();
        for _ in 0..20 {
            let v: Vec<i64> = (0..c.n_vertices())
                .map(|_| rng.gen_range(-1_000_000..=1_000_000))
                .collect();
            let f: Vec<i64> = (0..c.n_faces())
                .map(|_| rng.gen_range(-1_000_000..=1_000_000))
                .collect();
            let dd = apply_twice(b2, b1, &v);
            let tt = apply_twice(&t1, &t2, &f);
            worst = dd.iter().chain(&tt).fold(worst, |m, x| m.max(x.abs()));
        }
    }
    Outcome {
        pass: nonzero == 0 && worst == 0,
        detail: format!("nonzero product entries {nonzero}, max |d d x| {worst}"),
    }
}

fn yee_reduction() -> Outcome {
    let a = yee_equivalence(8, 0.125, 0.125).unwrap();
    let b = yee_equivalence(32, 1.0 / 32.0, 1.0 / 32.0).unwrap();
    let worst = a.max().max(b.max());
    Outcome {
        pass: worst <= 1e-12,
        detail: format!(
            "max deviation {worst:.3e} (8x8 TE {:.1e} TM {:.1e}, 32x32 TE {:.1e} TM {:.1e})",
            a.te, a.tm, b.te, b.tm
        ),
    }
}

fn cfl_correctness() -> Outcome {
    let c_wave = 2.0;
    let h = 0.1;
    let grid = generate::quad_grid(12, 12, h, h);
    let square = cfl_dt(&grid, &dual(&grid), c_wave).unwrap();
    let square_err = (square - h / (c_wave * SQRT_2)).abs() / (h / (c_wave * SQRT_2));
    let (n, side) = (8, 2.0);
    let a = side / n as f64;
    let tri = generate::equilateral_patch(n, side);
    let eq = cfl_dt(&tri, &dual(&tri), c_wave).unwrap();
    let eq_err = (eq - a / (c_wave * 6f64.sqrt())).abs() / (a / (c_wave * 6f64.sqrt()));

    let g32 = generate::quad_grid(32, 32, 1.0 / 32.0, 1.0 / 32.0);
    let d32 = dual(&g32);
    let oracle_err = (cfl_dt(&g32, &d32, 1.0).unwrap() / spectral_dt_oracle(&g32, &d32, 1.0).unwrap() - 1.0).abs();

    let patch = generate::equilateral_patch(16, 1.0);
    let r = stability_probe(&patch, &dual(&patch), Polarization::Te, &[0.99, 1.5], 10_000, 3).unwrap();
    let stable = r.outcome(0.99) == Some(Stability::Stable);
    let unstable = matches!(r.outcome(1.5), Some(Stability::Unstable { .. }));
    Outcome {
        pass: square_err <= 1e-12 && eq_err <= 1e-12 && oracle_err <= 0.05 && stable && unstable,
        detail: format!(
            "square rel {square_err:.1e}, equilateral rel {eq_err:.1e}, oracle rel {oracle_err:.1e}, 0.99 stable {stable}, 1.5 unstable {unstable}"
        ),
    }
}

fn divergence() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [
        generate::icosphere(3, 1.0),
        generate::quad_grid(32, 32, 1.0 / 32.0, 1.0 / 32.0),
    ] {
        let d = dual(&c);
        for pol in [Polarization::Te, Polarization::Tm] {
            let r = divergence_preservation(&c, &d, pol, InitialData::DivergenceFree, 10_000, 5).unwrap();
            worst = worst.max(r.relative());
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("max residual / field max-norm {worst:.3e}"),
    }
}

fn variational() -> Outcome {
    let r = variational_checks(100, 20, 6).unwrap();
    Outcome {
        pass: r.bianchi_integer == 0.0
            && r.gauge_relative <= 1e-10
            && r.gradient_relative <= 1e-5
            && r.instances == 100
            && r.gradient_edges == 20,
        detail: format!(
            "dF {:e} (integer A), gauge rel {:.1e}, gradient rel {:.1e}",
            r.bianchi_integer, r.gauge_relative, r.gradient_relative
        ),
    }
}

fn accuracy() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for pol in [Polarization::Te, Polarization::Tm] {
        let quad = convergence_study(&ConvergenceConfig {
            polarization: pol,
            ..ConvergenceConfig::default()
        })
        .unwrap();
        let tri = convergence_study(&ConvergenceConfig {
            polarization: pol,
            family: MeshFamily::UnstructuredTri,
            mode: if pol == Polarization::Te { (1, 0) } else { (1, 2) },
            ..ConvergenceConfig::default()
        })
        .unwrap();
        pass &= quad.resolutions.len() == 4 && (quad.observed_order - 2.0).abs() <= 0.2;
        pass &= tri.observed_order >= 0.8;
        detail.push(format!(
            "{pol} quad {:.3} tri {:.3}",
            quad.observed_order, tri.observed_order
        ));
    }
    Outcome {
        pass,
        detail: detail.join(", "),
    }
}

fn energy() -> Outcome {
    let mut band: f64 = 0.0;
    let mut rise: f64 = 0.0;
    for c in [
        generate::icosphere(3, 1.0),
        generate::quad_grid(32, 32, 1.0 / 32.0, 1.0 / 32.0),
    ] {
        let d = dual(&c);
        for pol in [Polarization::Te, Polarization::Tm] {
            band = band.max(
                energy_trace(&c, &d, pol, 0.0, 0.0, 0.5, 10_000, 7)
                    .unwrap()
                    .relative_band(),
            );
            let lossy = energy_trace(&c, &d, pol, 0.4, 0.1, 0.5, 10_000, 8).unwrap();
            rise = rise.max(lossy.max_relative_increase());
        }
    }
    Outcome {
        pass: band <= 1e-8 && rise <= 0.0,
        detail: format!("lossless band {band:.2e}, lossy max one-step rise {rise:.1e}"),
    }
}

fn cross_module() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [generate::icosphere(2, 1.0), generate::quad_grid(10, 10, 0.1, 0.1)] {
        let d = dual(&c);
        let r = embedded_trajectory_check(&c, &d, 30, 0.9, 9).unwrap();
        worst = worst.max(r.bianchi / r.field_scale).max(r.source / r.source_scale);
    }
    Outcome {
        pass: worst <= 1e-11,
        detail: format!("max relative residual {worst:.2e}"),
    }
}

fn pipeline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_off(&generate::icosphere(3, 1.0), &dir.path().join("sphere.off")).unwrap();
    let config = |name: &str| {
        format!(
            "[mesh]\npath = \"sphere.off\"\n\
             [[sources.pulse]]\ncell = 0\ntarget = \"magnetic\"\namplitude = 1.0\nt0 = 1.0\nwidth = 0.25\n\
             [run]\npolarization = \"TE\"\nn_steps = 5000\ncfl_safety = 0.99\nprobes = [\"face0\", \"face640\", \"edge7\"]\nframe_stride = 50\n\
             [output]\ndirectory = \"{name}\"\nframes = false\n"
        )
    };
    let mut csv = Vec::new();
    let mut summaries = Vec::new();
    for name in ["a", "b"] {
        let path = dir.path().join(format!("{name}.toml"));
        fs::write(&path, config(name)).unwrap();
        let s = run_pipeline(&parse_config(&path).unwrap()).unwrap();
        csv.push(fs::read(&s.probes_csv).unwrap());
        summaries.push(s);
    }
    let s = &summaries[0];
    let table = read_probes_csv(&s.probes_csv).unwrap();
    let finite = table.rows.len() == 5000
        && table
            .rows
            .iter()
            .all(|(_, t, v)| t.is_finite() && v.iter().all(|x| x.is_finite()));
    // energy once the pulse has passed, sampled every 50 steps
    let settled = s.frame_energies[(8.0 / (50.0 * s.dt)).ceil() as usize];
    let peak = s.frame_energies.iter().copied().fold(0.0, f64::max);
    let bounded = s.frame_energies.iter().all(|e| e.is_finite()) && settled > 0.0 && peak <= 2.0 * settled;
    let identical = csv[0] == csv[1];
    Outcome {
        pass: finite && bounded && identical && s.warnings.is_empty(),
        detail: format!(
            "finite {finite}, energy peak/settled {:.3}, byte-identical csv {identical}",
            peak / settled
        ),
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 exact cochain complex", Duration::from_secs(1), exact_complex),
        ("2 Yee reduction", Duration::from_secs(1), yee_reduction),
        ("3 CFL correctness", Duration::from_secs(30), cfl_correctness),
        ("4 divergence preservation", Duration::from_secs(30), divergence),
        (
            "5 variational and gauge structure",
            Duration::from_secs(10),
            variational,
        ),
        ("6 convergence order", Duration::from_secs(120), accuracy),
        ("7 energy behaviour", Duration::from_secs(30), energy),
        ("8 spacetime consistency", Duration::from_secs(10), cross_module),
        ("9 pipeline demo", Duration::from_secs(60), pipeline),
    ];
    let mut failed = Vec::new();
    for &(name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        println!(
            "{} [{name}] {} ({:.2} s of {} s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
