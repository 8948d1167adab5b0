use crate::dg::{Assembler, BoundaryData, CellSet, IpdgTerms, ModelParameters};
use crate::fine::{FineSolver, Nonlinearity, SaddleFactorization};
use crate::geometry::{CoarseGrid, TriMesh};
use crate::parallel::Execution;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Final velocity of the linear evolution (convection and Forchheimer drag
/// switched off) used to freeze the nonlinear weights of the local problems.
pub fn compute_linearization_field(mesh: &TriMesh, params: &ModelParameters, bc: &BoundaryData) -> Result<Vec<f64>> {
    compute_linearization_field_with(mesh, params, bc, Execution::default())
}

pub fn compute_linearization_field_with(
    mesh: &TriMesh,
    params: &ModelParameters,
    bc: &BoundaryData,
    exec: Execution,
) -> Result<Vec<f64>> {
    let mut solver = FineSolver::with_execution(mesh, params, bc, Nonlinearity::LINEAR, exec)?;
    let mut traj = solver.run()?;
    Ok(std::mem::take(&mut traj.states.last_mut().expect("initial layer").velocity))
}

/// Uniform mass source balancing the boundary flux of `dir` on boundary
/// facet `facet` of `set`: `|E| (dir · n) / |patch|`.
pub fn compatibility_constant(mesh: &TriMesh, set: &CellSet, facet: usize, dir: [f64; 2]) -> Result<f64> {
    let f = set.boundary_facets().get(facet).ok_or(Error::IndexOutOfRange {
        what: "boundary facet",
        index: facet,
        len: set.boundary_facets().len(),
    })?;
    if !(set.area() > 0.0) {
        return Err(Error::EmptyPatch(set.cells().first().copied().unwrap_or(usize::MAX)));
    }
    let len = mesh.edges()[f.edge].length;
    Ok(len * (dir[0] * f.normal[0] + dir[1] * f.normal[1]) / set.area())
}

/// Factorised steady local problem on one patch.
///
/// The operator is the full convection-diffusion form plus Darcy and
/// Forchheimer drag, linearised at the global field restricted to the patch,
/// with prescribed velocity on the whole patch boundary. The pressure mean is
/// fixed to zero.
#[derive(Debug)]
pub struct SnapshotProblem<'a> {
    mesh: &'a TriMesh,
    params: ModelParameters,
    set: CellSet,
    factor: SaddleFactorization,
    label: usize,
}

impl<'a> SnapshotProblem<'a> {
    /// `label` identifies the patch in error messages (the coarse cell id).
    pub fn new(
        mesh: &'a TriMesh,
        params: &ModelParameters,
        cells: Vec<usize>,
        u_lin: &[f64],
        label: usize,
    ) -> Result<Self> {
        Self::with_execution(mesh, params, cells, u_lin, label, Execution::Sequential)
    }

    pub fn with_execution(
        mesh: &'a TriMesh,
        params: &ModelParameters,
        cells: Vec<usize>,
        u_lin: &[f64],
        label: usize,
        exec: Execution,
    ) -> Result<Self> {
        let set = CellSet::patch(mesh, cells).map_err(|e| match e {
            Error::EmptyPatch(_) => Error::EmptyPatch(label),
            e => e,
        })?;
        let (k, b) = {
            let asm = Assembler::new(mesh, &set).with_execution(exec);
            let a = asm.ipdg(params, IpdgTerms::ALL, Some(u_lin))?;
            let d = asm.darcy_forchheimer(params, Some(u_lin))?;
            (CsrMatrix::sum(&[&a, &d])?, asm.divergence())
        };
        let gauge: Vec<f64> = set.cells().iter().map(|&c| mesh.area(c)).collect();
        let factor = SaddleFactorization::new(k, b, Some(gauge), format!("snapshot problem on coarse cell {label}"))?;
        Ok(SnapshotProblem { mesh, params: *params, set, factor, label })
    }

    pub fn cell_set(&self) -> &CellSet {
        &self.set
    }

    pub fn n_boundary_facets(&self) -> usize {
        self.set.boundary_facets().len()
    }

    /// Local velocity and pressure for the datum `g` on boundary facet
    /// `facet` (zero elsewhere), with the compatible mass source.
    pub fn solve_delta(&self, facet: usize, g: [f64; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
        let asm = Assembler::new(self.mesh, &self.set).with_execution(Execution::Sequential);
        let (fu, mut fp) = asm.facet_load(&self.params, facet, g)?;
        let c = compatibility_constant(self.mesh, &self.set, facet, g)?;
        for (l, &cell) in self.set.cells().iter().enumerate() {
            fp[l] -= c * self.mesh.area(cell);
        }
        self.factor.solve(&fu, &fp).map_err(|e| match e {
            Error::SingularSystem { context, detail } => {
                Error::SingularSystem { context, detail: format!("boundary facet {facet}: {detail}") }
            }
            e => e,
        })
    }

    /// Restricts a patch velocity vector to the cells of `target` (sorted
    /// fine-cell ids that must belong to the patch).
    pub fn restrict(&self, local: &[f64], target: &[usize]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(6 * target.len());
        for &c in target {
            let l = self.set.local_index(c).ok_or(Error::IndexOutOfRange {
                what: "patch cell",
                index: c,
                len: self.set.len(),
            })?;
            out.extend_from_slice(&local[6 * l..6 * l + 6]);
        }
        Ok(out)
    }

    pub fn label(&self) -> usize {
        self.label
    }
}

/// Local snapshot vectors of one coarse cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub coarse_cell: usize,
    pub oversampled: bool,
    /// Fine cells of the coarse cell, ascending; row layout is `6 * position + dof`.
    pub cells: Vec<usize>,
    /// One row per (patch boundary facet, direction), x before y.
    pub rows: Vec<Vec<f64>>,
}

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Snapshot matrix as a dense `J x 6|K_i|` array.
    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = 6 * self.cells.len();
        nalgebra::DMatrix::from_fn(self.rows.len(), n, |i, j| self.rows[i][j])
    }
}

pub const DIRECTIONS: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// Solves every local problem of coarse cell `i` on `K_i` or on its
/// oversampled neighbourhood and restricts the velocities to `K_i`.
pub fn build_snapshots(
    mesh: &TriMesh,
    coarse: &CoarseGrid,
    params: &ModelParameters,
    i: usize,
    oversampled: bool,
    u_lin: &[f64],
) -> Result<SnapshotSet> {
    let target = {
        let mut c = coarse.cell(i)?.fine_cells.clone();
        c.sort_unstable();
        c
    };
    if target.is_empty() {
        return Err(Error::EmptyPatch(i));
    }
    let patch = if oversampled { coarse.fine_cells_of(&coarse.oversample_region(i)?) } else { target.clone() };
    let problem = SnapshotProblem::new(mesh, params, patch, u_lin, i)?;
    let mut rows = Vec::with_capacity(2 * problem.n_boundary_facets());
    for k in 0..problem.n_boundary_facets() {
        for dir in DIRECTIONS {
            let (u, _) = problem.solve_delta(k, dir)?;
            let row = problem.restrict(&u, &target)?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("snapshot"));
            }
            rows.push(row);
        }
    }
    Ok(SnapshotSet { coarse_cell: i, oversampled, cells: target, rows })
}
