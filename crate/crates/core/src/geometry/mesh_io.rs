//! Line-oriented ASCII mesh format.
//!
//! ```text
//! msflow-mesh v1
//! coarse <nx> <ny>
//! bbox <xmin> <xmax> <ymin> <ymax>        (optional)
//! vertices <n>
//! <id> <x> <y>
//! cells <n>
//! <id> <v0> <v1> <v2> <fluid|porous> <coarse_id>
//! boundary <n>                           (optional)
//! <v0> <v1> <left|right|bottom|top>
//! ```
//!
//! Ids are consecutive from zero. `#` starts a comment. A coarse id of `-1`
//! (or `?`) asks the loader to recompute the id from the cell centroid.

use std::fmt::Write as _;
use std::path::Path;

use super::{assign_coarse_ids, Adjacency, Cell, CoarseGrid, Rect, Region, Side, TriMesh};
use crate::{Error, Result};

pub const HEADER: &str = "msflow-mesh v1";

pub fn write_mesh_string(mesh: &TriMesh, coarse: &CoarseGrid) -> String {
    let mut s = String::new();
    let b = mesh.bbox();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "coarse {} {}", coarse.nx(), coarse.ny()).unwrap();
    writeln!(s, "bbox {} {} {} {}", b.xmin, b.xmax, b.ymin, b.ymax).unwrap();
    writeln!(s, "vertices {}", mesh.vertices().len()).unwrap();
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(s, "{i} {} {}", p[0], p[1]).unwrap();
    }
    writeln!(s, "cells {}", mesh.n_cells()).unwrap();
    for (i, c) in mesh.cells().iter().enumerate() {
        let region = match c.region {
            Region::Fluid => "fluid",
            Region::Porous => "porous",
        };
        let [a, bb, d] = c.vertices;
        writeln!(s, "{i} {a} {bb} {d} {region} {}", c.coarse).unwrap();
    }
    let boundary: Vec<_> = mesh
        .edges()
        .iter()
        .filter_map(|e| match e.adjacency {
            Adjacency::Boundary { side, .. } => Some((e.vertices, side)),
            _ => None,
        })
        .collect();
    writeln!(s, "boundary {}", boundary.len()).unwrap();
    for ([a, bb], side) in boundary {
        writeln!(s, "{a} {bb} {}", side.label()).unwrap();
    }
    s
}

pub fn write_mesh(path: &Path, mesh: &TriMesh, coarse: &CoarseGrid) -> Result<()> {
    crate::io::write_atomic(path, write_mesh_string(mesh, coarse).as_bytes())
}

pub fn load_mesh(path: &Path) -> Result<(TriMesh, CoarseGrid)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_mesh(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty, comment-stripped line with its 1-based number.
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }
}

fn fmt_err(line: usize, msg: impl Into<String>) -> Error {
    Error::MeshFormat { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| fmt_err(line, format!("invalid {what} `{tok}`")))
}

fn expect_len(line: usize, toks: &[&str], n: usize, what: &str) -> Result<()> {
    if toks.len() != n {
        return Err(fmt_err(line, format!("{what}: expected {n} fields, found {}", toks.len())));
    }
    Ok(())
}

pub fn parse_mesh(text: &str) -> Result<(TriMesh, CoarseGrid)> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    match lines.next_tokens() {
        Some((_, t)) if t.join(" ") == HEADER => {}
        Some((l, _)) => return Err(fmt_err(l, format!("expected header `{HEADER}`"))),
        None => return Err(fmt_err(0, "empty file")),
    }
    let mut coarse_dims: Option<(usize, usize)> = None;
    let mut bbox: Option<Rect> = None;
    let mut vertices = Vec::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut recompute = false;
    let mut overrides = Vec::new();
    let mut seen_vertices = false;
    let mut seen_cells = false;

    while let Some((l, toks)) = lines.next_tokens() {
        match toks[0] {
            "coarse" => {
                expect_len(l, &toks, 3, "coarse")?;
                coarse_dims = Some((num(l, toks[1], "nx")?, num(l, toks[2], "ny")?));
            }
            "bbox" => {
                expect_len(l, &toks, 5, "bbox")?;
                bbox = Some(Rect::new(
                    num(l, toks[1], "xmin")?,
                    num(l, toks[2], "xmax")?,
                    num(l, toks[3], "ymin")?,
                    num(l, toks[4], "ymax")?,
                ));
            }
            "vertices" => {
                expect_len(l, &toks, 2, "vertices")?;
                let n: usize = num(l, toks[1], "vertex count")?;
                for k in 0..n {
                    let (l, t) = lines.next_tokens().ok_or_else(|| fmt_err(l, "unexpected end of vertices"))?;
                    expect_len(l, &t, 3, "vertex")?;
                    let id: usize = num(l, t[0], "vertex id")?;
                    if id != k {
                        return Err(fmt_err(l, format!("vertex ids must be consecutive: expected {k}, found {id}")));
                    }
                    let p = [num::<f64>(l, t[1], "x")?, num::<f64>(l, t[2], "y")?];
                    if !p.iter().all(|v| v.is_finite()) {
                        return Err(fmt_err(l, "non-finite coordinate"));
                    }
                    vertices.push(p);
                }
                seen_vertices = true;
            }
            "cells" => {
                expect_len(l, &toks, 2, "cells")?;
                let n: usize = num(l, toks[1], "cell count")?;
                for k in 0..n {
                    let (l, t) = lines.next_tokens().ok_or_else(|| fmt_err(l, "unexpected end of cells"))?;
                    expect_len(l, &t, 6, "cell")?;
                    let id: usize = num(l, t[0], "cell id")?;
                    if id != k {
                        return Err(fmt_err(l, format!("cell ids must be consecutive: expected {k}, found {id}")));
                    }
                    let v = [num(l, t[1], "vertex")?, num(l, t[2], "vertex")?, num(l, t[3], "vertex")?];
                    let region = match t[4] {
                        "fluid" | "0" => Region::Fluid,
                        "porous" | "1" => Region::Porous,
                        other => return Err(fmt_err(l, format!("invalid region `{other}`"))),
                    };
                    let coarse = match t[5] {
                        "-1" | "?" => {
                            recompute = true;
                            0
                        }
                        s => num(l, s, "coarse id")?,
                    };
                    cells.push(Cell { vertices: v, region, coarse });
                }
                seen_cells = true;
            }
            "boundary" => {
                expect_len(l, &toks, 2, "boundary")?;
                let n: usize = num(l, toks[1], "boundary count")?;
                for _ in 0..n {
                    let (l, t) = lines.next_tokens().ok_or_else(|| fmt_err(l, "unexpected end of boundary"))?;
                    expect_len(l, &t, 3, "boundary edge")?;
                    let side = Side::from_label(t[2]).ok_or_else(|| fmt_err(l, format!("invalid side `{}`", t[2])))?;
                    overrides.push(([num(l, t[0], "vertex")?, num(l, t[1], "vertex")?], side));
                }
            }
            other => return Err(fmt_err(l, format!("unknown section `{other}`"))),
        }
    }
    if !seen_vertices || !seen_cells {
        return Err(fmt_err(0, "missing `vertices` or `cells` section"));
    }
    let (nx, ny) = coarse_dims.ok_or_else(|| fmt_err(0, "missing `coarse <nx> <ny>` line"))?;
    let mut mesh = TriMesh::new(vertices, cells, bbox, &overrides)?;
    if recompute {
        assign_coarse_ids(&mut mesh, nx, ny);
    }
    let coarse = CoarseGrid::build(&mesh, nx, ny)?;
    Ok((mesh, coarse))
}
