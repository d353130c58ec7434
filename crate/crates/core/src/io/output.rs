use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::IoError;
use crate::mesh::{DualMesh, SimplicialSurface};
use crate::solver::{Frame, Probe};

/// 17 significant digits, enough to round-trip any `f64`.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-vertex `|e|`-weighted average of the incident edge values. Display
/// only: it mixes tangential components of different directions.
fn vertex_average(complex: &SimplicialSurface, dual: &DualMesh, edge_field: &[f64]) -> Vec<f64> {
    let mut sum = vec![0.0; complex.n_vertices()];
    let mut weight = vec![0.0; complex.n_vertices()];
    for (e, edge) in complex.edges().iter().enumerate() {
        let l = dual.edge_lengths[e];
        for v in [edge.tail, edge.head] {
            sum[v] += l * edge_field[e];
            weight[v] += l;
        }
    }
    sum.iter()
        .zip(&weight)
        .map(|(s, w)| if *w > 0.0 { s / w } else { 0.0 })
        .collect()
}

/// Writes a legacy ASCII VTK polydata file: the primal mesh, the face field
/// as cell data and the vertex-averaged edge field as point data.
pub fn write_frame_vtk(
    frame: &Frame,
    complex: &SimplicialSurface,
    dual: &DualMesh,
    path: &Path,
) -> Result<(), IoError> {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "dec-maxwell step {} time {}", frame.step, full(frame.time));
    let _ = writeln!(s, "ASCII\nDATASET POLYDATA");
    let _ = writeln!(s, "POINTS {} double", complex.n_vertices());
    for p in complex.vertices() {
        let _ = writeln!(s, "{} {} {}", full(p.x), full(p.y), full(p.z));
    }
    let size: usize = complex.faces().iter().map(|f| f.vertices.len() + 1).sum();
    let _ = writeln!(s, "POLYGONS {} {}", complex.n_faces(), size);
    for f in complex.faces() {
        let _ = write!(s, "{}", f.vertices.len());
        for v in &f.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_DATA {}", complex.n_faces());
    let _ = writeln!(s, "SCALARS face_field double 1\nLOOKUP_TABLE default");
    for w in &frame.face_field {
        let _ = writeln!(s, "{}", full(*w));
    }
    let _ = writeln!(s, "POINT_DATA {}", complex.n_vertices());
    let _ = writeln!(s, "SCALARS edge_field_vertex_average double 1\nLOOKUP_TABLE default");
    for v in vertex_average(complex, dual, &frame.edge_field) {
        let _ = writeln!(s, "{}", full(v));
    }
    fs::write(path, s).map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Probe time series as read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeTable {
    pub probes: Vec<Probe>,
    pub rows: Vec<(u64, f64, Vec<f64>)>,
}

/// Writes `step,time,<probe ids>` and one row per step.
pub fn write_probes_csv(probes: &[Probe], series: &[(u64, f64, Vec<f64>)], path: &Path) -> Result<(), IoError> {
    let csv_err = |source| IoError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["step".to_string(), "time".to_string()];
    header.extend(probes.iter().map(Probe::to_string));
    w.write_record(&header).map_err(csv_err)?;
    for (step, time, values) in series {
        let mut row = vec![step.to_string(), full(*time)];
        row.extend(values.iter().map(|v| full(*v)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })
}

pub fn read_probes_csv(path: &Path) -> Result<ProbeTable, IoError> {
    let csv_err = |source| IoError::Csv {
        path: path.to_owned(),
        source,
    };
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() < 2 || &header[0] != "step" || &header[1] != "time" {
        return Err(parse_err(1, "header must start with `step,time`".into()));
    }
    let probes = header
        .iter()
        .skip(2)
        .map(|h| h.parse::<Probe>().map_err(|m| parse_err(1, m)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = i + 2;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| parse_err(line, format!("invalid number `{s}`")))
        };
        let step = record[0]
            .parse::<u64>()
            .map_err(|_| parse_err(line, format!("invalid step `{}`", &record[0])))?;
        let values = record.iter().skip(2).map(num).collect::<Result<Vec<_>, _>>()?;
        rows.push((step, num(&record[1])?, values));
    }
    Ok(ProbeTable { probes, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_complex, build_dual, generate, DualMode, Point3};
    use crate::solver::SimState;

    fn section<'a>(text: &'a str, start: &str, count: usize) -> Vec<&'a str> {
        let mut lines = text.lines().skip_while(|l| !l.starts_with(start));
        lines.next().expect("section present");
        lines.filter(|l| !l.starts_with("LOOKUP_TABLE")).take(count).collect()
    }

    #[test]
    fn single_triangle_frame() {
        let c = build_complex(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.5, 0.8, 0.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let mut st = SimState::zeros(crate::solver::Polarization::Te, 3, 1, 0.1);
        st.face_field[0] = 2.0;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.vtk");
        write_frame_vtk(&Frame::from(&st), &c, &d, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        let cells = section(&text, "SCALARS face_field", 1);
        assert_eq!(cells[0].parse::<f64>().unwrap(), 2.0);
        let points = section(&text, "SCALARS edge_field", 3);
        assert!(points.iter().all(|p| p.parse::<f64>().unwrap() == 0.0));
        assert!(text.contains("POLYGONS 1 4\n3 0 1 2\n"));
    }

    #[test]
    fn mesh_section_round_trips() {
        let c = generate::icosphere(1, 1.0 / 3.0);
        let d = build_dual(&c, DualMode::Strict).unwrap();
        let mut st = SimState::zeros(crate::solver::Polarization::Tm, c.n_edges(), c.n_faces(), 0.1);
        st.edge_field = (0..c.n_edges()).map(|e| (e as f64).sin()).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.vtk");
        write_frame_vtk(&Frame::from(&st), &c, &d, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        for (line, p) in section(&text, "POINTS", c.n_vertices()).iter().zip(c.vertices()) {
            let xyz: Vec<f64> = line.split(' ').map(|t| t.parse().unwrap()).collect();
            assert_eq!(xyz, vec![p.x, p.y, p.z]);
        }
        // uniform edge field averages to itself
        for v in vertex_average(&c, &d, &vec![1.5; c.n_edges()]) {
            assert!((v - 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn probe_csv_lines_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_probes_csv(&[Probe::Face(3)], &[], &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "step,time,face3\n");

        let probes = [Probe::Edge(1)];
        let series: Vec<_> = (1..=3u64).map(|k| (k, 0.1 * k as f64, vec![1.0 / k as f64])).collect();
        write_probes_csv(&probes, &series, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let back = read_probes_csv(&path).unwrap();
        assert_eq!(back.probes, probes);
        assert_eq!(back.rows, series);
    }
}
