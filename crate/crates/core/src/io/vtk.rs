//! Legacy ASCII VTK (version 3.0) unstructured-grid export and re-import.
//!
//! Cell data: `pressure`, `region` (0 fluid, 1 porous), `coarse_id`, and the
//! discontinuous velocity as the 6-component field `velocity_dg` (x values at
//! the three vertices, then y values). Point data: `velocity`, the vertex
//! average of the adjacent cells' values. Floats are written in shortest
//! round-trip form, so re-import is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::dg::DgState;
use crate::geometry::{Point, Region, TriMesh};
use crate::{Error, Result};

pub fn vtk_string(mesh: &TriMesh, state: &DgState, title: &str) -> Result<String> {
    let n = mesh.n_cells();
    if state.n_cells() != n || state.velocity.len() != 6 * n {
        return Err(Error::DimensionMismatch { what: "state for export", expected: n, found: state.n_cells() });
    }
    let nv = mesh.vertices().len();
    let mut s = String::with_capacity(128 * n);
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {nv} double").unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{} {} 0", p[0], p[1]).unwrap();
    }
    writeln!(s, "CELLS {n} {}", 4 * n).unwrap();
    for c in mesh.cells() {
        let [a, b, d] = c.vertices;
        writeln!(s, "3 {a} {b} {d}").unwrap();
    }
    writeln!(s, "CELL_TYPES {n}").unwrap();
    for _ in 0..n {
        s.push_str("5\n");
    }
    writeln!(s, "CELL_DATA {n}\nSCALARS pressure double 1\nLOOKUP_TABLE default").unwrap();
    for p in &state.pressure {
        writeln!(s, "{p}").unwrap();
    }
    s.push_str("SCALARS region int 1\nLOOKUP_TABLE default\n");
    for c in mesh.cells() {
        writeln!(s, "{}", c.region.tag()).unwrap();
    }
    s.push_str("SCALARS coarse_id int 1\nLOOKUP_TABLE default\n");
    for c in mesh.cells() {
        writeln!(s, "{}", c.coarse).unwrap();
    }
    writeln!(s, "FIELD dg 1\nvelocity_dg 6 {n} double").unwrap();
    for c in 0..n {
        let v = &state.velocity[6 * c..6 * c + 6];
        writeln!(s, "{} {} {} {} {} {}", v[0], v[1], v[2], v[3], v[4], v[5]).unwrap();
    }
    let mut acc = vec![[0.0f64; 3]; nv];
    for (c, cell) in mesh.cells().iter().enumerate() {
        for (k, &v) in cell.vertices.iter().enumerate() {
            acc[v][0] += state.velocity[6 * c + k];
            acc[v][1] += state.velocity[6 * c + 3 + k];
            acc[v][2] += 1.0;
        }
    }
    writeln!(s, "POINT_DATA {nv}\nVECTORS velocity double").unwrap();
    for a in acc {
        let d = a[2].max(1.0);
        writeln!(s, "{} {} 0", a[0] / d, a[1] / d).unwrap();
    }
    Ok(s)
}

pub fn export_vtk(mesh: &TriMesh, state: &DgState, path: &Path) -> Result<()> {
    super::write_atomic(path, vtk_string(mesh, state, "msflow state")?.as_bytes())
}

/// Contents of a file written by [`export_vtk`].
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<Point>,
    pub cells: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    pub coarse_ids: Vec<usize>,
    pub state: DgState,
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::MeshFormat { line, msg: msg.into() }
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        loop {
            let (i, l) = self.it.next().ok_or_else(|| bad(self.line + 1, "unexpected end of file"))?;
            self.line = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Ok(l);
            }
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, count: usize) -> Result<Vec<T>> {
        let l = self.next()?;
        let v: Vec<T> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(self.line, format!("invalid number `{t}`"))))
            .collect::<Result<_>>()?;
        if v.len() != count {
            return Err(bad(self.line, format!("expected {count} values, found {}", v.len())));
        }
        Ok(v)
    }

    fn header(&mut self, prefix: &str) -> Result<Vec<&'a str>> {
        let l = self.next()?;
        if !l.starts_with(prefix) {
            return Err(bad(self.line, format!("expected `{prefix}`, found `{l}`")));
        }
        Ok(l.split_whitespace().collect())
    }

    fn count(&mut self, prefix: &str, index: usize) -> Result<usize> {
        let h = self.header(prefix)?;
        h.get(index).and_then(|t| t.parse().ok()).ok_or_else(|| bad(self.line, format!("malformed `{prefix}` header")))
    }
}

/// Parses the layout produced by [`vtk_string`].
pub fn parse_vtk(text: &str) -> Result<VtkData> {
    let mut r = Lines { it: text.lines().enumerate(), line: 0 };
    r.header("# vtk DataFile")?;
    r.next()?;
    r.header("ASCII")?;
    r.header("DATASET UNSTRUCTURED_GRID")?;
    let nv = r.count("POINTS", 1)?;
    let points = (0..nv).map(|_| r.numbers::<f64>(3).map(|v| [v[0], v[1]])).collect::<Result<Vec<_>>>()?;
    let n = r.count("CELLS", 1)?;
    let mut cells = Vec::with_capacity(n);
    for _ in 0..n {
        let v = r.numbers::<usize>(4)?;
        if v[0] != 3 || v[1..].iter().any(|&i| i >= nv) {
            return Err(bad(r.line, "expected a triangle with valid point ids"));
        }
        cells.push([v[1], v[2], v[3]]);
    }
    r.count("CELL_TYPES", 1)?;
    for _ in 0..n {
        if r.numbers::<u8>(1)?[0] != 5 {
            return Err(bad(r.line, "expected cell type 5"));
        }
    }
    if r.count("CELL_DATA", 1)? != n {
        return Err(bad(r.line, "cell data count mismatch"));
    }
    r.header("SCALARS pressure")?;
    r.header("LOOKUP_TABLE")?;
    let pressure = (0..n).map(|_| r.numbers::<f64>(1).map(|v| v[0])).collect::<Result<Vec<_>>>()?;
    r.header("SCALARS region")?;
    r.header("LOOKUP_TABLE")?;
    let regions = (0..n)
        .map(|_| {
            let t = r.numbers::<u8>(1)?[0];
            Region::from_tag(t).ok_or_else(|| bad(r.line, format!("invalid region tag {t}")))
        })
        .collect::<Result<Vec<_>>>()?;
    r.header("SCALARS coarse_id")?;
    r.header("LOOKUP_TABLE")?;
    let coarse_ids = (0..n).map(|_| r.numbers::<usize>(1).map(|v| v[0])).collect::<Result<Vec<_>>>()?;
    r.header("FIELD")?;
    r.header("velocity_dg 6")?;
    let mut velocity = Vec::with_capacity(6 * n);
    for _ in 0..n {
        velocity.extend(r.numbers::<f64>(6)?);
    }
    let state = DgState::new(velocity, pressure)?;
    Ok(VtkData { points, cells, regions, coarse_ids, state })
}

pub fn import_vtk(path: &Path) -> Result<VtkData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_vtk(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_structured_mesh, CircleInclusion, DomainSpec, Rect};

    #[test]
    fn minimal_mesh_round_trip() {
        let d = DomainSpec::new(Rect::symmetric_unit(), vec![CircleInclusion::new([0.5, -0.5], 0.45).unwrap()], 0.3).unwrap();
        let (m, _) = generate_structured_mesh(&d, 1, (1, 1)).unwrap();
        let mut s = DgState::zeros(2);
        for (i, v) in s.velocity.iter_mut().enumerate() {
            *v = (i as f64 * 0.7).sin() / 3.0;
        }
        s.pressure = vec![1.0 / 7.0, -2.5e-17];
        let text = vtk_string(&m, &s, "t").unwrap();
        assert!(text.contains("POINTS 4 double") && text.contains("CELLS 2 8"));
        let back = parse_vtk(&text).unwrap();
        assert_eq!(back.state, s);
        assert_eq!(back.points.len(), 4);
        assert!(back.regions.iter().all(|r| matches!(r, Region::Fluid | Region::Porous)));
        assert!(parse_vtk(&text.replace("CELL_TYPES 2\n5", "CELL_TYPES 2\n9")).is_err());
    }
}
