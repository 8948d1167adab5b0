//! Heterogeneous domain, fine triangulation and coarse overlay.

mod coarse;
mod domain;
mod mesh;
pub mod mesh_io;

pub use coarse::{CoarseCell, CoarseFacet, CoarseGrid};
pub use domain::{CircleInclusion, DomainSpec, Point, Rect, Region};
pub use mesh::{Adjacency, BoundaryKind, BoundaryLayout, Cell, Edge, Side, TriMesh};

use crate::{Error, Result};

/// Uniform triangulation conforming to an `nx x ny` coarse grid.
///
/// Each coarse cell holds `n_per_coarse x n_per_coarse` squares, each split
/// into two triangles along the `(i, j) -> (i+1, j+1)` diagonal. A cell is
/// porous iff its centroid lies inside an inclusion disk.
pub fn generate_structured_mesh(
    domain: &DomainSpec,
    n_per_coarse: usize,
    coarse_dims: (usize, usize),
) -> Result<(TriMesh, CoarseGrid)> {
    let (nx, ny) = coarse_dims;
    if n_per_coarse == 0 {
        return Err(Error::param("n_per_coarse", "must be at least 1"));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::param("coarse_dims", format!("need at least 1x1, got {nx}x{ny}")));
    }
    let bbox = domain.bbox();
    let (mx, my) = (nx * n_per_coarse, ny * n_per_coarse);
    let mut vertices = Vec::with_capacity((mx + 1) * (my + 1));
    for j in 0..=my {
        for i in 0..=mx {
            vertices.push([
                bbox.xmin + bbox.width() * i as f64 / mx as f64,
                bbox.ymin + bbox.height() * j as f64 / my as f64,
            ]);
        }
    }
    let vid = |i: usize, j: usize| j * (mx + 1) + i;
    let mut cells = Vec::with_capacity(2 * mx * my);
    for j in 0..my {
        for i in 0..mx {
            let coarse = (j / n_per_coarse) * nx + i / n_per_coarse;
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            cells.push(Cell { vertices: [v00, v10, v11], region: Region::Fluid, coarse });
            cells.push(Cell { vertices: [v00, v11, v01], region: Region::Fluid, coarse });
        }
    }
    let mut mesh = TriMesh::new(vertices, cells, Some(bbox), &[])?;
    mesh.set_regions(|p| domain.region_of(p));
    let coarse = CoarseGrid::build(&mesh, nx, ny)?;
    Ok((mesh, coarse))
}

/// Recomputes each cell's coarse id from its centroid.
pub fn assign_coarse_ids(mesh: &mut TriMesh, nx: usize, ny: usize) {
    let bbox = mesh.bbox();
    let ids: Vec<usize> = (0..mesh.n_cells()).map(|c| coarse::locate_in(&bbox, nx, ny, mesh.centroid(c))).collect();
    mesh.set_coarse_ids(&ids);
}
