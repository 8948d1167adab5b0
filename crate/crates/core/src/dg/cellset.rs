use crate::geometry::{Adjacency, BoundaryKind, Point, Side, TriMesh};
use crate::{Error, Result};

const ABSENT: usize = usize::MAX;

/// Edge between two cells of the set; local indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorFacet {
    pub edge: usize,
    pub plus: usize,
    pub minus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFacet {
    pub edge: usize,
    /// Local index of the owning cell.
    pub cell: usize,
    /// Unit normal pointing out of the cell set.
    pub normal: Point,
    /// Domain side, when the facet lies on the domain boundary.
    pub side: Option<Side>,
    pub kind: BoundaryKind,
}

/// A set of fine cells with local numbering, used as the assembly domain:
/// the whole mesh for the global problem, a coarse cell or an oversampled
/// neighbourhood for local problems.
///
/// Local cell `l` owns velocity dofs `6l..6l+6` and pressure dof `l`.
#[derive(Debug, Clone)]
pub struct CellSet {
    cells: Vec<usize>,
    local: Vec<usize>,
    interior: Vec<InteriorFacet>,
    boundary: Vec<BoundaryFacet>,
    area: f64,
}

impl CellSet {
    /// All mesh cells; boundary facets take their kind from the mesh layout.
    pub fn whole(mesh: &TriMesh) -> Self {
        let cells: Vec<usize> = (0..mesh.n_cells()).collect();
        Self::build(mesh, cells, true).expect("whole mesh is non-empty")
    }

    /// A patch of cells. Every facet on the patch boundary, including those
    /// on the domain boundary, carries prescribed velocity data.
    pub fn patch(mesh: &TriMesh, mut cells: Vec<usize>) -> Result<Self> {
        cells.sort_unstable();
        cells.dedup();
        if let Some(&c) = cells.iter().find(|&&c| c >= mesh.n_cells()) {
            return Err(Error::IndexOutOfRange { what: "fine cell", index: c, len: mesh.n_cells() });
        }
        Self::build(mesh, cells, false)
    }

    fn build(mesh: &TriMesh, cells: Vec<usize>, global_kinds: bool) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyPatch(usize::MAX));
        }
        let mut local = vec![ABSENT; mesh.n_cells()];
        for (l, &c) in cells.iter().enumerate() {
            local[c] = l;
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (e, edge) in mesh.edges().iter().enumerate() {
            match edge.adjacency {
                Adjacency::Interior { plus, minus } => {
                    let (lp, lm) = (local[plus], local[minus]);
                    match (lp != ABSENT, lm != ABSENT) {
                        (true, true) => interior.push(InteriorFacet { edge: e, plus: lp, minus: lm }),
                        (true, false) => boundary.push(BoundaryFacet {
                            edge: e,
                            cell: lp,
                            normal: edge.normal,
                            side: None,
                            kind: BoundaryKind::Velocity,
                        }),
                        (false, true) => boundary.push(BoundaryFacet {
                            edge: e,
                            cell: lm,
                            normal: [-edge.normal[0], -edge.normal[1]],
                            side: None,
                            kind: BoundaryKind::Velocity,
                        }),
                        (false, false) => {}
                    }
                }
                Adjacency::Boundary { cell, side } => {
                    if local[cell] != ABSENT {
                        let kind = if global_kinds { mesh.boundary_kind(side) } else { BoundaryKind::Velocity };
                        boundary.push(BoundaryFacet { edge: e, cell: local[cell], normal: edge.normal, side: Some(side), kind });
                    }
                }
            }
        }
        let area = cells.iter().map(|&c| mesh.area(c)).sum();
        Ok(CellSet { cells, local, interior, boundary, area })
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn n_velocity_dofs(&self) -> usize {
        6 * self.cells.len()
    }

    pub fn local_index(&self, global_cell: usize) -> Option<usize> {
        self.local.get(global_cell).copied().filter(|&l| l != ABSENT)
    }

    pub fn interior_facets(&self) -> &[InteriorFacet] {
        &self.interior
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Whether every boundary facet carries velocity data, which leaves the
    /// pressure determined only up to a constant.
    pub fn is_enclosed(&self) -> bool {
        self.boundary.iter().all(|f| f.kind == BoundaryKind::Velocity)
    }

    /// Gathers global velocity coefficients into this set's local layout.
    pub fn restrict_velocity(&self, global: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(6 * self.cells.len());
        for &c in &self.cells {
            out.extend_from_slice(&global[6 * c..6 * c + 6]);
        }
        out
    }

    /// Scatters local velocity coefficients into a global vector.
    pub fn extend_velocity(&self, local: &[f64], n_cells: usize) -> Vec<f64> {
        let mut out = vec![0.0; 6 * n_cells];
        for (l, &c) in self.cells.iter().enumerate() {
            out[6 * c..6 * c + 6].copy_from_slice(&local[6 * l..6 * l + 6]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_structured_mesh, DomainSpec, Rect};

    #[test]
    fn patch_boundary_normals_point_outward() {
        let d = DomainSpec::new(Rect::symmetric_unit(), vec![], 0.3).unwrap();
        let (m, c) = generate_structured_mesh(&d, 3, (2, 2)).unwrap();
        let set = CellSet::patch(&m, c.cells()[3].fine_cells.clone()).unwrap();
        assert_eq!(set.boundary_facets().len(), c.cells()[3].boundary_facets.len());
        assert!(set.is_enclosed());
        for f in set.boundary_facets() {
            let cell = set.cells()[f.cell];
            let cen = m.centroid(cell);
            let [a, b] = m.edge_points(f.edge);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            assert!(f.normal[0] * (mid[0] - cen[0]) + f.normal[1] * (mid[1] - cen[1]) > 0.0);
        }
        let whole = CellSet::whole(&m);
        assert!(!whole.is_enclosed());
        assert!((whole.area() - 4.0).abs() < 1e-12);
    }
}
