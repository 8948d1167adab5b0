use super::domain::{Point, Rect};
use super::mesh::{Adjacency, TriMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseCell {
    pub ix: usize,
    pub iy: usize,
    pub rect: Rect,
    /// Fine cells inside this coarse cell, ascending.
    pub fine_cells: Vec<usize>,
    /// Fine edges on the coarse cell boundary, ascending.
    pub boundary_facets: Vec<usize>,
}

impl CoarseCell {
    pub fn area(&self) -> f64 {
        self.rect.area()
    }
}

/// A facet of the coarse grid: the segment between two coarse vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseFacet {
    pub from: Point,
    pub to: Point,
    /// Adjacent coarse cells; `None` on the domain boundary.
    pub cells: [Option<usize>; 2],
}

/// Uniform `nx x ny` rectangular overlay of the fine mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrid {
    nx: usize,
    ny: usize,
    bbox: Rect,
    cells: Vec<CoarseCell>,
    facets: Vec<CoarseFacet>,
}

impl CoarseGrid {
    /// Overlays a structured grid on `mesh`. Every fine cell's `coarse` id
    /// is checked against its centroid location and every fine cell must lie
    /// inside its coarse rectangle.
    pub fn build(mesh: &TriMesh, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::param("coarse_dims", format!("need at least 1x1, got {nx}x{ny}")));
        }
        let bbox = mesh.bbox();
        let hx = bbox.width() / nx as f64;
        let hy = bbox.height() / ny as f64;
        let mut cells: Vec<CoarseCell> = (0..nx * ny)
            .map(|i| {
                let (ix, iy) = (i % nx, i / nx);
                let rect = Rect::new(
                    bbox.xmin + ix as f64 * hx,
                    bbox.xmin + (ix + 1) as f64 * hx,
                    bbox.ymin + iy as f64 * hy,
                    bbox.ymin + (iy + 1) as f64 * hy,
                );
                CoarseCell { ix, iy, rect, fine_cells: Vec::new(), boundary_facets: Vec::new() }
            })
            .collect();
        let tol = 1e-9 * (hx + hy);
        for (c, cell) in mesh.cells().iter().enumerate() {
            let expected = locate(&bbox, nx, ny, mesh.centroid(c));
            if cell.coarse != expected {
                return Err(Error::NonConforming { cell: c, coarse: cell.coarse });
            }
            let rect = cells[expected].rect;
            if !mesh.cell_points(c).iter().all(|&p| rect.contains(p, tol)) {
                return Err(Error::NonConforming { cell: c, coarse: expected });
            }
            cells[expected].fine_cells.push(c);
        }
        for (e, edge) in mesh.edges().iter().enumerate() {
            match edge.adjacency {
                Adjacency::Interior { plus, minus } => {
                    let (a, b) = (mesh.cells()[plus].coarse, mesh.cells()[minus].coarse);
                    if a != b {
                        cells[a].boundary_facets.push(e);
                        cells[b].boundary_facets.push(e);
                    }
                }
                Adjacency::Boundary { cell, .. } => cells[mesh.cells()[cell].coarse].boundary_facets.push(e),
            }
        }
        for c in &mut cells {
            c.boundary_facets.sort_unstable();
        }

        let mut facets = Vec::new();
        let x = |i: usize| bbox.xmin + i as f64 * hx;
        let y = |j: usize| bbox.ymin + j as f64 * hy;
        for iy in 0..ny {
            for ix in 0..=nx {
                let left = (ix > 0).then(|| iy * nx + ix - 1);
                let right = (ix < nx).then(|| iy * nx + ix);
                facets.push(CoarseFacet { from: [x(ix), y(iy)], to: [x(ix), y(iy + 1)], cells: [left, right] });
            }
        }
        for iy in 0..=ny {
            for ix in 0..nx {
                let below = (iy > 0).then(|| (iy - 1) * nx + ix);
                let above = (iy < ny).then(|| iy * nx + ix);
                facets.push(CoarseFacet { from: [x(ix), y(iy)], to: [x(ix + 1), y(iy)], cells: [below, above] });
            }
        }
        Ok(CoarseGrid { nx, ny, bbox, cells, facets })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Number of coarse cells `N = nx * ny`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CoarseCell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> Result<&CoarseCell> {
        self.cells.get(i).ok_or(Error::IndexOutOfRange { what: "coarse cell", index: i, len: self.cells.len() })
    }

    pub fn facets(&self) -> &[CoarseFacet] {
        &self.facets
    }

    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    /// Coarse cell containing point `p` (clamped to the grid).
    pub fn locate(&self, p: Point) -> usize {
        locate(&self.bbox, self.nx, self.ny, p)
    }

    /// `K_i` together with every coarse cell sharing at least a vertex with
    /// it, clipped at the domain boundary. Ascending ids.
    pub fn oversample_region(&self, i: usize) -> Result<Vec<usize>> {
        let c = self.cell(i)?;
        let (ix, iy) = (c.ix as isize, c.iy as isize);
        let mut out = Vec::with_capacity(9);
        for jy in iy - 1..=iy + 1 {
            for jx in ix - 1..=ix + 1 {
                if jx >= 0 && jy >= 0 && (jx as usize) < self.nx && (jy as usize) < self.ny {
                    out.push(jy as usize * self.nx + jx as usize);
                }
            }
        }
        Ok(out)
    }

    /// Fine cells of the union of the given coarse cells, ascending.
    pub fn fine_cells_of(&self, coarse_cells: &[usize]) -> Vec<usize> {
        let mut v: Vec<usize> = coarse_cells.iter().flat_map(|&i| self.cells[i].fine_cells.iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

fn locate(bbox: &Rect, nx: usize, ny: usize, p: Point) -> usize {
    let fx = ((p[0] - bbox.xmin) / bbox.width() * nx as f64).floor();
    let fy = ((p[1] - bbox.ymin) / bbox.height() * ny as f64).floor();
    let ix = (fx.max(0.0) as usize).min(nx - 1);
    let iy = (fy.max(0.0) as usize).min(ny - 1);
    iy * nx + ix
}

pub(crate) fn locate_in(bbox: &Rect, nx: usize, ny: usize, p: Point) -> usize {
    locate(bbox, nx, ny, p)
}
