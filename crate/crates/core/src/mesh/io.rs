//! Plain-text mesh files.
//!
//! ```text
//! nv nt nb
//! x y            (nv lines)
//! v0 v1 v2       (nt lines, counterclockwise)
//! v0 v1 D|N      (nb lines)
//! ```
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{build_mesh, BoundaryLabel, Mesh};
use crate::error::{Error, Result};

pub fn read_mesh_file(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")))
    };
    let (ln, header) = next("header")?;
    let counts: Vec<usize> = fields(header, ln, &parse_err)?;
    let [nv, nt, nb] = counts[..] else {
        return Err(parse_err(ln, "header must be `nv nt nb`".into()));
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex")?;
        let xy: Vec<f64> = fields(l, ln, &parse_err)?;
        match xy[..] {
            [x, y] if x.is_finite() && y.is_finite() => vertices.push([x, y]),
            _ => return Err(parse_err(ln, "vertex line must be `x y`".into())),
        }
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = next("triangle")?;
        let idx: Vec<usize> = fields(l, ln, &parse_err)?;
        match idx[..] {
            [a, b, c] => triangles.push([a, b, c]),
            _ => return Err(parse_err(ln, "triangle line must be `v0 v1 v2`".into())),
        }
    }
    let mut labels = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, l) = next("boundary edge")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let [a, b, lab] = parts[..] else {
            return Err(parse_err(ln, "boundary line must be `v0 v1 D|N`".into()));
        };
        let a: usize = a.parse().map_err(|e| parse_err(ln, format!("{e}")))?;
        let b: usize = b.parse().map_err(|e| parse_err(ln, format!("{e}")))?;
        let label = match lab {
            "D" => BoundaryLabel::Dirichlet,
            "N" => BoundaryLabel::Neumann,
            other => return Err(parse_err(ln, format!("unknown boundary label `{other}`"))),
        };
        labels.push((a, b, label));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content".into()));
    }
    build_mesh(vertices, triangles, &labels)
}

fn fields<T: FromStr>(
    line: &str,
    ln: usize,
    parse_err: &impl Fn(usize, String) -> Error,
) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    line.split_whitespace()
        .map(|s| s.parse::<T>().map_err(|e| parse_err(ln, format!("`{s}`: {e}"))))
        .collect()
}

pub fn write_mesh_file(mesh: &Mesh, path: &Path) -> Result<()> {
    let labels = mesh.boundary_labels();
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.n_vertices(), mesh.n_triangles(), labels.len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for (a, b, l) in labels {
        let _ = writeln!(s, "{a} {b} {}", l.as_char());
    }
    std::fs::write(path, s)?;
    Ok(())
}
