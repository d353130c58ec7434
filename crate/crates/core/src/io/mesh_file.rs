use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::IoError;
use crate::mesh::{build_complex, Point3, SimplicialSurface};

/// Reads an `.off` or `.obj` surface (by extension, case-insensitive).
pub fn load_mesh(path: &Path) -> Result<SimplicialSurface, IoError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let parse: fn(&str, &Path) -> Result<SimplicialSurface, IoError> = match ext.as_deref() {
        Some("off") => parse_off,
        Some("obj") => parse_obj,
        _ => return Err(IoError::UnsupportedFormat { path: path.to_owned() }),
    };
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse(&text, path)
}

/// Non-empty lines with `#` comments removed, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn number<T: std::str::FromStr>(token: &str, what: &str, path: &Path, line: usize) -> Result<T, IoError> {
    token.parse().map_err(|_| IoError::Parse {
        path: path.to_owned(),
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

fn finish(vertices: Vec<Point3>, faces: Vec<Vec<usize>>, path: &Path) -> Result<SimplicialSurface, IoError> {
    build_complex(vertices, faces).map_err(|source| IoError::Mesh {
        path: path.to_owned(),
        source,
    })
}

/// Parses OFF text: an `OFF` header, a `vertices faces edges` count line
/// (which may share the header line), one `x y z` line per vertex and one
/// count-prefixed index list per face. Trailing colour values are ignored.
pub fn parse_off(text: &str, path: &Path) -> Result<SimplicialSurface, IoError> {
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("OFF") {
        return Err(parse_err(hline, format!("expected `OFF` header, found `{header}`")));
    }
    let mut counts: Vec<&str> = tokens.collect();
    let mut cline = hline;
    if counts.is_empty() {
        let (l, c) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "missing counts line".into()))?;
        cline = l;
        counts = c.split_whitespace().collect();
    }
    if counts.len() < 2 {
        return Err(parse_err(cline, "counts line needs vertex and face counts".into()));
    }
    let nv: usize = number(counts[0], "vertex count", path, cline)?;
    let nf: usize = number(counts[1], "face count", path, cline)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, body) = lines.next().ok_or_else(|| {
            parse_err(
                cline,
                format!("expected {nv} vertices, file ended after {}", vertices.len()),
            )
        })?;
        let t: Vec<&str> = body.split_whitespace().collect();
        if t.len() < 3 {
            return Err(parse_err(l, "vertex needs 3 coordinates".into()));
        }
        vertices.push(Point3::new(
            number(t[0], "coordinate", path, l)?,
            number(t[1], "coordinate", path, l)?,
            number(t[2], "coordinate", path, l)?,
        ));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, body) = lines
            .next()
            .ok_or_else(|| parse_err(cline, format!("expected {nf} faces, file ended after {}", faces.len())))?;
        let t: Vec<&str> = body.split_whitespace().collect();
        let k: usize = number(t[0], "face size", path, l)?;
        if t.len() < k + 1 {
            return Err(parse_err(
                l,
                format!("face declares {k} vertices but lists {}", t.len() - 1),
            ));
        }
        let mut face = Vec::with_capacity(k);
        for tok in &t[1..=k] {
            let index: i64 = number(tok, "vertex index", path, l)?;
            if index < 0 || index as usize >= nv {
                return Err(IoError::IndexOutOfRange {
                    path: path.to_owned(),
                    line: l,
                    index,
                    count: nv,
                });
            }
            face.push(index as usize);
        }
        faces.push(face);
    }
    finish(vertices, faces, path)
}

/// Parses the `v` and `f` records of OBJ text. Indices are 1-based (negative
/// ones count back from the latest vertex); `v/vt/vn` triplets use the
/// vertex part. Other records are ignored.
pub fn parse_obj(text: &str, path: &Path) -> Result<SimplicialSurface, IoError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (l, body) in content_lines(text) {
        let mut t = body.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 {
                    return Err(IoError::Parse {
                        path: path.to_owned(),
                        line: l,
                        message: "vertex needs 3 coordinates".into(),
                    });
                }
                vertices.push(Point3::new(
                    number(c[0], "coordinate", path, l)?,
                    number(c[1], "coordinate", path, l)?,
                    number(c[2], "coordinate", path, l)?,
                ));
            }
            Some("f") => {
                let mut face = Vec::new();
                for tok in t {
                    let raw: i64 = number(tok.split('/').next().unwrap_or(""), "vertex index", path, l)?;
                    let n = vertices.len() as i64;
                    let index = if raw < 0 { n + raw } else { raw - 1 };
                    if raw == 0 || index < 0 || index >= n {
                        return Err(IoError::IndexOutOfRange {
                            path: path.to_owned(),
                            line: l,
                            index: raw,
                            count: vertices.len(),
                        });
                    }
                    face.push(index as usize);
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    finish(vertices, faces, path)
}

fn save(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Writes OFF with shortest round-trip coordinates, faces in their stored
/// orientation.
pub fn write_off(complex: &SimplicialSurface, path: &Path) -> Result<(), IoError> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "OFF\n{} {} {}",
        complex.n_vertices(),
        complex.n_faces(),
        complex.n_edges()
    );
    for p in complex.vertices() {
        let _ = writeln!(s, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in complex.faces() {
        let _ = write!(s, "{}", f.vertices.len());
        for v in &f.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    save(path, &s)
}

pub fn write_obj(complex: &SimplicialSurface, path: &Path) -> Result<(), IoError> {
    let mut s = String::new();
    for p in complex.vertices() {
        let _ = writeln!(s, "v {:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in complex.faces() {
        s.push('f');
        for v in &f.vertices {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    }
    save(path, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;

    fn here() -> &'static Path {
        Path::new("test.off")
    }

    #[test]
    fn off_single_triangle() {
        let c = parse_off("OFF\n# comment\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", here()).unwrap();
        assert_eq!((c.n_vertices(), c.n_edges(), c.n_faces()), (3, 3, 1));
        // counts on the header line and trailing colour values
        let c = parse_off("OFF 3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2 255 0 0\n", here()).unwrap();
        assert_eq!(c.n_faces(), 1);
    }

    #[test]
    fn off_errors_carry_lines() {
        match parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 99\n", here()) {
            Err(IoError::IndexOutOfRange {
                index: 99,
                line: 6,
                count: 3,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_off("PLY\n", here()),
            Err(IoError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n", here()),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            parse_off("OFF\n3 x 0\n", here()),
            Err(IoError::Parse { line: 2, .. })
        ));
        // non-manifold input is reported by the complex builder
        let fan = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n";
        assert!(matches!(parse_off(fan, here()), Err(IoError::Mesh { .. })));
    }

    #[test]
    fn obj_quad_and_triplets() {
        let c = parse_obj(
            "o square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3 4\n",
            here(),
        )
        .unwrap();
        assert_eq!(c.n_faces(), 1);
        assert_eq!(c.faces()[0].vertices.len(), 4);
        let c = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 -1//3\n", here()).unwrap();
        assert_eq!(c.faces()[0].vertices, vec![0, 1, 2]);
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", here()),
            Err(IoError::IndexOutOfRange { index: 4, line: 4, .. })
        ));
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n", here()),
            Err(IoError::IndexOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn writers_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate::jittered_equilateral(5, 1.3, 0.3, 9);
        let off = dir.path().join("m.off");
        let obj = dir.path().join("m.OBJ");
        write_off(&c, &off).unwrap();
        write_obj(&c, &obj).unwrap();
        for path in [&off, &obj] {
            let back = load_mesh(path).unwrap();
            assert_eq!(back.vertices(), c.vertices());
            assert_eq!(back.faces(), c.faces());
        }
        assert!(matches!(
            load_mesh(&dir.path().join("m.stl")),
            Err(IoError::UnsupportedFormat { .. })
        ));
        assert!(matches!(
            load_mesh(&dir.path().join("none.off")),
            Err(IoError::Read { .. })
        ));
    }
}
