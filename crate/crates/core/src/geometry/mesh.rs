use std::collections::HashMap;

use super::domain::{Point, Rect, Region};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    /// Counter-clockwise vertex ids.
    pub vertices: [usize; 3],
    pub region: Region,
    pub coarse: usize,
}

/// Side of the rectangular bounding box a boundary edge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
            Side::Bottom => 2,
            Side::Top => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }

    pub fn from_label(s: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.label() == s)
    }
}

/// Boundary condition class of a side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Prescribed velocity (weakly imposed Dirichlet data).
    Velocity,
    /// Zero-traction / zero-pressure outflow, imposed naturally.
    Outflow,
}

/// Boundary condition class per side, indexed by [`Side::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryLayout(pub [BoundaryKind; 4]);

impl Default for BoundaryLayout {
    /// Inflow on the left, walls on top and bottom, outflow on the right.
    fn default() -> Self {
        use BoundaryKind::*;
        BoundaryLayout([Velocity, Outflow, Velocity, Velocity])
    }
}

impl BoundaryLayout {
    pub fn all_velocity() -> Self {
        BoundaryLayout([BoundaryKind::Velocity; 4])
    }

    pub fn kind(&self, side: Side) -> BoundaryKind {
        self.0[side.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    /// `plus` has the lower cell index; the edge normal points from `plus`
    /// into `minus`.
    Interior { plus: usize, minus: usize },
    /// Normal points out of the domain.
    Boundary { cell: usize, side: Side },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub adjacency: Adjacency,
    pub normal: Point,
    pub length: f64,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        matches!(self.adjacency, Adjacency::Interior { .. })
    }
}

/// Fine triangulation with oriented edge topology and region tags.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    cell_edges: Vec<[usize; 3]>,
    bbox: Rect,
    layout: BoundaryLayout,
}

impl TriMesh {
    /// Builds a mesh and its edge topology. Clockwise cells are reoriented.
    /// `side_overrides` assigns sides to specific boundary edges (given by
    /// their vertex pair); all other boundary edges are classified by the
    /// bounding-box side they lie on.
    pub fn new(
        vertices: Vec<Point>,
        mut cells: Vec<Cell>,
        bbox: Option<Rect>,
        side_overrides: &[([usize; 2], Side)],
    ) -> Result<Self> {
        for (c, cell) in cells.iter_mut().enumerate() {
            for &v in &cell.vertices {
                if v >= vertices.len() {
                    return Err(Error::MissingVertex { cell: c, vertex: v });
                }
            }
            let [a, b, d] = cell.vertices.map(|v| vertices[v]);
            let area2 = (b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]);
            if area2.abs() <= f64::EPSILON * 16.0 * bbox_scale(&vertices).powi(2) {
                return Err(Error::DegenerateCell(c));
            }
            if area2 < 0.0 {
                cell.vertices.swap(1, 2);
            }
        }
        let bbox = bbox.unwrap_or_else(|| bounding_rect(&vertices));
        let mut mesh = TriMesh { vertices, cells, edges: Vec::new(), cell_edges: Vec::new(), bbox, layout: BoundaryLayout::default() };
        mesh.build_edge_topology(side_overrides)?;
        Ok(mesh)
    }

    /// Populates edges: deterministic ids in order of first appearance,
    /// `K+` is the lower cell index, normals are unit length and point from
    /// `K+` to `K-` (outward on the boundary).
    fn build_edge_topology(&mut self, side_overrides: &[([usize; 2], Side)]) -> Result<()> {
        let mut by_key: HashMap<(usize, usize), usize> = HashMap::new();
        let mut adjacent: Vec<Vec<usize>> = Vec::new();
        let mut edge_vertices: Vec<[usize; 2]> = Vec::new();
        let mut cell_edges = vec![[0usize; 3]; self.cells.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            for k in 0..3 {
                let a = cell.vertices[(k + 1) % 3];
                let b = cell.vertices[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let id = *by_key.entry(key).or_insert_with(|| {
                    adjacent.push(Vec::new());
                    edge_vertices.push([key.0, key.1]);
                    adjacent.len() - 1
                });
                adjacent[id].push(c);
                cell_edges[c][k] = id;
            }
        }
        if let Some(id) = adjacent.iter().position(|c| c.len() > 2) {
            let [a, b] = edge_vertices[id];
            return Err(Error::OverSharedEdge(a, b));
        }
        let overrides: HashMap<(usize, usize), Side> =
            side_overrides.iter().map(|&([a, b], s)| ((a.min(b), a.max(b)), s)).collect();
        for &(a, b) in overrides.keys() {
            match by_key.get(&(a, b)) {
                Some(&id) if adjacent[id].len() == 1 => {}
                _ => return Err(Error::DanglingEdge(a, b)),
            }
        }

        let tol = 1e-9 * bbox_scale(&self.vertices).max(1.0);
        let mut edges = Vec::with_capacity(adjacent.len());
        for (id, cells) in adjacent.iter().enumerate() {
            let [a, b] = edge_vertices[id];
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let length = (t[0] * t[0] + t[1] * t[1]).sqrt();
            let mut normal = [t[1] / length, -t[0] / length];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let owner = cells[0];
            let cen = self.centroid(owner);
            if normal[0] * (mid[0] - cen[0]) + normal[1] * (mid[1] - cen[1]) < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            let adjacency = match cells.len() {
                1 => {
                    let side = match overrides.get(&(a, b)) {
                        Some(&s) => s,
                        None => self.classify_side(mid, normal, tol).ok_or(Error::DanglingEdge(a, b))?,
                    };
                    Adjacency::Boundary { cell: owner, side }
                }
                2 => {
                    debug_assert!(cells[0] < cells[1]);
                    Adjacency::Interior { plus: cells[0], minus: cells[1] }
                }
                _ => return Err(Error::OverSharedEdge(a, b)),
            };
            edges.push(Edge { vertices: [a, b], adjacency, normal, length });
        }
        self.edges = edges;
        self.cell_edges = cell_edges;
        Ok(())
    }

    fn classify_side(&self, mid: Point, normal: Point, tol: f64) -> Option<Side> {
        let r = &self.bbox;
        let candidates = [
            (Side::Left, (mid[0] - r.xmin).abs(), -normal[0]),
            (Side::Right, (mid[0] - r.xmax).abs(), normal[0]),
            (Side::Bottom, (mid[1] - r.ymin).abs(), -normal[1]),
            (Side::Top, (mid[1] - r.ymax).abs(), normal[1]),
        ];
        candidates.into_iter().find(|&(_, d, align)| d < tol && align > 0.5).map(|(s, _, _)| s)
    }

    pub fn with_boundary_layout(mut self, layout: BoundaryLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn set_boundary_layout(&mut self, layout: BoundaryLayout) {
        self.layout = layout;
    }

    pub fn boundary_layout(&self) -> BoundaryLayout {
        self.layout
    }

    pub fn boundary_kind(&self, side: Side) -> BoundaryKind {
        self.layout.kind(side)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    pub fn cell_edges(&self, c: usize) -> [usize; 3] {
        self.cell_edges[c]
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        self.cells[c].vertices.map(|v| self.vertices[v])
    }

    pub fn area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cell_points(c);
        0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, c: usize) -> Point {
        let [a, b, d] = self.cell_points(c);
        [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0]
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    /// Outward unit normal of edge `e` as seen from `cell`.
    pub fn outward_normal(&self, e: usize, cell: usize) -> Point {
        let edge = &self.edges[e];
        match edge.adjacency {
            Adjacency::Interior { minus, .. } if minus == cell => [-edge.normal[0], -edge.normal[1]],
            _ => edge.normal,
        }
    }

    pub(crate) fn set_coarse_ids(&mut self, ids: &[usize]) {
        for (cell, &id) in self.cells.iter_mut().zip(ids) {
            cell.coarse = id;
        }
    }

    pub(crate) fn set_regions(&mut self, f: impl Fn(Point) -> Region) {
        for c in 0..self.cells.len() {
            let p = self.centroid(c);
            self.cells[c].region = f(p);
        }
    }
}

fn bounding_rect(v: &[Point]) -> Rect {
    let mut r = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in v {
        r.xmin = r.xmin.min(p[0]);
        r.xmax = r.xmax.max(p[0]);
        r.ymin = r.ymin.min(p[1]);
        r.ymax = r.ymax.max(p[1]);
    }
    r
}

fn bbox_scale(v: &[Point]) -> f64 {
    let r = bounding_rect(v);
    (r.width().powi(2) + r.height().powi(2)).sqrt()
}
