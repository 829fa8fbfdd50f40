//! Plain-text mesh format.
//!
//! ```text
//! N E F
//! x y            (N lines)
//! i j k          (F lines, 0-based)
//! a b            (E lines, optional: E = 0 means derive)
//! ```
//!
//! The writer always emits the derived edges so the file can be inspected.
//! When a file lists edges, the reader checks them against the derived ones.
//! Numbers use `.` as the decimal separator regardless of locale.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{Point, SurfaceMesh};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &SurfaceMesh, mut out: W) -> Result<()> {
    out.write_all(mesh_to_string(mesh).as_bytes())?;
    Ok(())
}

pub fn mesh_to_string(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.n_nodes(), mesh.n_edges(), mesh.n_facets());
    for p in mesh.coords() {
        let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
    }
    for [a, b, c] in mesh.facets() {
        let _ = writeln!(s, "{a} {b} {c}");
    }
    for [a, b] in mesh.edges() {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

fn parse_fields<T: std::str::FromStr>(line: &str, lineno: usize, count: usize) -> Result<Vec<T>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != count {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected {count} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<T>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("cannot parse `{f}`"),
            })
        })
        .collect()
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<SurfaceMesh> {
    let mut lines = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    let mut it = lines.into_iter();
    let (lineno, header) = it.next().ok_or(Error::Parse {
        line: 1,
        message: "empty mesh file".into(),
    })?;
    let counts: Vec<usize> = parse_fields(&header, lineno, 3)?;
    let (n, e, f) = (counts[0], counts[1], counts[2]);

    let mut next = |what: &str| {
        it.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unexpected end of file while reading {what}"),
        })
    };

    let mut coords = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = next("nodes")?;
        let xy: Vec<f64> = parse_fields(&l, ln, 2)?;
        coords.push(Point::new(xy[0], xy[1]));
    }
    let mut facets = Vec::with_capacity(f);
    for _ in 0..f {
        let (ln, l) = next("facets")?;
        let v: Vec<usize> = parse_fields(&l, ln, 3)?;
        facets.push([v[0], v[1], v[2]]);
    }
    let mut listed = Vec::with_capacity(e);
    for _ in 0..e {
        let (ln, l) = next("edges")?;
        let v: Vec<usize> = parse_fields(&l, ln, 2)?;
        listed.push((ln, [v[0].min(v[1]), v[0].max(v[1])]));
    }

    let mesh = SurfaceMesh::new(coords, facets)?;
    if e > 0 {
        if e != mesh.n_edges() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("header lists {e} edges, facets define {}", mesh.n_edges()),
            });
        }
        for (ln, edge) in listed {
            if mesh.find_edge(edge[0], edge[1]).is_none() {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("edge {edge:?} is not a side of any facet"),
                });
            }
        }
    }
    Ok(mesh)
}
