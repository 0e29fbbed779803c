use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use super::cloud::PointCloud;
use super::mesh::ReferenceMesh;
use crate::error::{Error, Result};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse_err(path: &Path, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: format!("line {line}: {message}"),
    }
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("invalid number {tok:?}")))
}

/// Points from whitespace-separated `x y z` lines (blank lines and `#` comments skipped).
pub fn parse_xyz(path: &Path, text: &str) -> Result<Vec<Vector3<f64>>> {
    let mut pts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(parse_err(
                path,
                n + 1,
                format!("expected 3 values, found {}", tok.len()),
            ));
        }
        pts.push(Vector3::new(
            parse_f64(path, n + 1, tok[0])?,
            parse_f64(path, n + 1, tok[1])?,
            parse_f64(path, n + 1, tok[2])?,
        ));
    }
    Ok(pts)
}

pub fn read_xyz(path: &Path) -> Result<PointCloud> {
    let pts = parse_xyz(path, &read_text(path)?)?;
    PointCloud::new(pts).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Parse {
            path: path.display().to_string(),
            message: m,
        },
        e => e,
    })
}

pub fn write_xyz(path: &Path, points: &[Vector3<f64>]) -> Result<()> {
    let mut s = String::with_capacity(points.len() * 64);
    for p in points {
        writeln!(s, "{:e} {:e} {:e}", p.x, p.y, p.z).unwrap();
    }
    write_text(path, &s)
}

/// Triangle mesh from ASCII OFF text. The mesh must be a closed, consistently
/// oriented manifold.
pub fn parse_off(path: &Path, text: &str) -> Result<ReferenceMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n0, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let mut counts_line = None;
    if header == "OFF" {
    } else if let Some(rest) = header.strip_prefix("OFF") {
        counts_line = Some((n0, rest.trim()));
    } else {
        return Err(parse_err(path, n0, "missing OFF header"));
    }
    let (nc, counts) = match counts_line {
        Some(c) => c,
        None => lines.next().ok_or_else(|| parse_err(path, n0, "missing counts line"))?,
    };
    let c: Vec<usize> = counts
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(path, nc, format!("invalid count {t:?}")))
        })
        .collect::<Result<_>>()?;
    if c.len() < 2 {
        return Err(parse_err(path, nc, "counts line needs vertex and face counts"));
    }
    let (nv, nf) = (c[0], c[1]);
    let mut v = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines
            .next()
            .ok_or_else(|| parse_err(path, nc, "too few vertex lines"))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() < 3 {
            return Err(parse_err(path, n, "vertex line needs 3 coordinates"));
        }
        v.push(Vector3::new(
            parse_f64(path, n, tok[0])?,
            parse_f64(path, n, tok[1])?,
            parse_f64(path, n, tok[2])?,
        ));
    }
    let mut f = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = lines.next().ok_or_else(|| parse_err(path, nc, "too few face lines"))?;
        let tok: Vec<usize> = l
            .split_whitespace()
            .take(4)
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| parse_err(path, n, format!("invalid index {t:?}")))
            })
            .collect::<Result<_>>()?;
        if tok.len() != 4 || tok[0] != 3 {
            return Err(parse_err(path, n, "only triangular faces `3 i j k` are supported"));
        }
        if tok[1..].iter().any(|&i| i >= nv) {
            return Err(parse_err(path, n, "face index out of range"));
        }
        f.push([tok[1], tok[2], tok[3]]);
    }
    ReferenceMesh::new_closed(v, f, 0)
}

pub fn read_off(path: &Path) -> Result<ReferenceMesh> {
    parse_off(path, &read_text(path)?)
}

pub fn write_off(path: &Path, mesh: &ReferenceMesh) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "OFF").unwrap();
    writeln!(
        s,
        "{} {} {}",
        mesh.vertices().len(),
        mesh.triangles().len(),
        mesh.edges().len()
    )
    .unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{:e} {:e} {:e}", p.x, p.y, p.z).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    write_text(path, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::seeds::icosphere;

    #[test]
    fn off_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.off");
        let m = icosphere(1);
        write_off(&p, &m).unwrap();
        let r = read_off(&p).unwrap();
        assert_eq!(r.triangles(), m.triangles());
        for (a, b) in r.vertices().iter().zip(m.vertices()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_triangle_off_is_open() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let r = parse_off(Path::new("t.off"), text);
        assert!(matches!(r, Err(Error::OpenSurface { .. })));
    }

    #[test]
    fn xyz_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.xyz");
        let pts = vec![Vector3::new(1.0, 2.5e-3, -3.0), Vector3::new(0.1, 0.2, 0.3)];
        write_xyz(&p, &pts).unwrap();
        let c = read_xyz(&p).unwrap();
        assert_eq!(c.points(), &pts[..]);
        let bad = parse_xyz(Path::new("b.xyz"), "1 2 3\n1 2\n");
        assert!(matches!(bad, Err(Error::Parse { .. })));
        let missing = read_xyz(&dir.path().join("nope.xyz"));
        assert!(matches!(missing, Err(Error::Io { .. })));
    }
}
