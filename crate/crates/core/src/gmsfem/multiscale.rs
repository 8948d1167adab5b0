use super::snapshot::{build_snapshots, compute_linearization_field_with};
use super::spectral::{spectral_reduce, CellBasis};
use crate::dg::{Assembler, BoundaryData, CellSet, DgState, IpdgTerms, ModelParameters, TraceMass};
use crate::fine::{divergence_residual, Nonlinearity, SaddleFactorization};
use crate::geometry::{CoarseGrid, TriMesh};
use crate::parallel::Execution;
use crate::sparse::{CsrMatrix, Triplet};
use crate::{Error, Result};

/// Offline construction settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BasisOptions {
    pub oversampled: bool,
    pub trace_mass: TraceMass,
}

/// Per-coarse-cell spectral bases for every cell of the coarse grid.
#[derive(Debug, Clone)]
pub struct MultiscaleSpace {
    pub options: BasisOptions,
    pub bases: Vec<CellBasis>,
}

impl MultiscaleSpace {
    /// Snapshot and spectral construction for all coarse cells, linearised
    /// at `u_lin` (see [`super::compute_linearization_field`]).
    pub fn build(
        mesh: &TriMesh,
        coarse: &CoarseGrid,
        params: &ModelParameters,
        u_lin: &[f64],
        options: BasisOptions,
        exec: Execution,
    ) -> Result<Self> {
        if u_lin.len() != 6 * mesh.n_cells() {
            return Err(Error::DimensionMismatch {
                what: "linearisation velocity",
                expected: 6 * mesh.n_cells(),
                found: u_lin.len(),
            });
        }
        let bases = exec.try_map(coarse.len(), |i| {
            let snaps = build_snapshots(mesh, coarse, params, i, options.oversampled, u_lin)?;
            let basis = spectral_reduce(mesh, params, &snaps, options.trace_mass)?;
            log::debug!("coarse cell {i}: {} snapshots, lambda_1 = {:.4e}", snaps.len(), basis.eigenvalues[0]);
            Ok::<_, Error>(basis)
        })?;
        Ok(MultiscaleSpace { options, bases })
    }

    /// Largest admissible per-cell basis count.
    pub fn max_basis(&self) -> usize {
        self.bases.iter().map(CellBasis::len).min().unwrap_or(0)
    }

    pub fn projection(&self, mesh: &TriMesh, coarse: &CoarseGrid, m: usize) -> Result<Projection> {
        build_projection(mesh, coarse, &self.bases, m)
    }
}

/// Restriction operators of the coarse space.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub m: usize,
    /// `N·M x 6 N_h`; row `i M + k` is basis function `k` of coarse cell `i`.
    pub r_u: CsrMatrix,
    /// `N x N_h` coarse-cell indicators.
    pub r_p: CsrMatrix,
}

impl Projection {
    pub fn n_coarse(&self) -> usize {
        self.r_p.nrows()
    }

    /// `M·N + N`.
    pub fn dof(&self) -> usize {
        self.r_u.nrows() + self.r_p.nrows()
    }

    /// Fine velocity `R_uᵀ u_H`.
    pub fn reconstruct_velocity(&self, u_h: &[f64]) -> Vec<f64> {
        self.r_u.matvec_transpose(u_h)
    }

    /// Fine pressure `R_pᵀ p_H`.
    pub fn reconstruct_pressure(&self, p_h: &[f64]) -> Vec<f64> {
        self.r_p.matvec_transpose(p_h)
    }
}

/// Assembles `R_u` from the first `m` functions of every cell basis and
/// `R_p` from the coarse-cell indicators.
pub fn build_projection(mesh: &TriMesh, coarse: &CoarseGrid, bases: &[CellBasis], m: usize) -> Result<Projection> {
    if bases.len() != coarse.len() {
        return Err(Error::InconsistentBasis { cell: bases.len(), expected: coarse.len(), found: bases.len() });
    }
    if m == 0 {
        return Err(Error::param("M", "must be at least 1"));
    }
    let mut tu: Vec<Triplet> = Vec::new();
    for (i, b) in bases.iter().enumerate() {
        if b.coarse_cell != i {
            return Err(Error::InconsistentBasis { cell: i, expected: i, found: b.coarse_cell });
        }
        if b.len() < m {
            return Err(Error::InconsistentBasis { cell: i, expected: m, found: b.len() });
        }
        for (k, f) in b.functions[..m].iter().enumerate() {
            if f.len() != 6 * b.cells.len() {
                return Err(Error::InconsistentBasis { cell: i, expected: 6 * b.cells.len(), found: f.len() });
            }
            for (pos, &c) in b.cells.iter().enumerate() {
                for d in 0..6 {
                    tu.push((i * m + k, 6 * c + d, f[6 * pos + d]));
                }
            }
        }
    }
    let r_u = CsrMatrix::from_triplets(m * coarse.len(), 6 * mesh.n_cells(), tu);
    let tp = coarse
        .cells()
        .iter()
        .enumerate()
        .flat_map(|(i, k)| k.fine_cells.iter().map(move |&c| (i, c, 1.0)))
        .collect();
    let r_p = CsrMatrix::from_triplets(coarse.len(), mesh.n_cells(), tp);
    Ok(Projection { m, r_u, r_p })
}

/// Coarse trajectory and its fine reconstruction.
#[derive(Debug, Clone)]
pub struct MultiscaleRun {
    /// Coarse `(u_H, p_H)` for layers `0..=n_steps`.
    pub coarse_states: Vec<(Vec<f64>, Vec<f64>)>,
    pub times: Vec<f64>,
    /// Relative `‖B_H u_H − F_H^p‖` per step.
    pub divergence_residuals: Vec<f64>,
    /// `R_uᵀ u_H` and the coarse pressure lifted to fine cells at the final layer.
    pub fine: DgState,
    pub coarse_pressure: Vec<f64>,
}

/// Projected time loop. Constant blocks are projected once; convection and
/// Forchheimer weights are reassembled from the reconstructed velocity of the
/// previous coarse layer and projected every step.
pub struct CoarseSolver<'a> {
    mesh: &'a TriMesh,
    set: CellSet,
    params: ModelParameters,
    proj: &'a Projection,
    nonlinearity: Nonlinearity,
    exec: Execution,
    mass: CsrMatrix,
    linear: CsrMatrix,
    divergence: CsrMatrix,
    rhs_u: Vec<f64>,
    rhs_p: Vec<f64>,
    gauge: Option<Vec<f64>>,
}

impl<'a> CoarseSolver<'a> {
    pub fn new(
        mesh: &'a TriMesh,
        coarse: &CoarseGrid,
        params: &ModelParameters,
        bc: &BoundaryData,
        proj: &'a Projection,
        nonlinearity: Nonlinearity,
        exec: Execution,
    ) -> Result<Self> {
        params.validate()?;
        let set = CellSet::whole(mesh);
        let asm = Assembler::new(mesh, &set).with_execution(exec);
        let (ru, rp) = (&proj.r_u, &proj.r_p);
        let mass = asm.mass(params).project(ru, ru);
        let a = asm.ipdg(params, IpdgTerms::LINEAR, None)?;
        let d = asm.darcy_forchheimer(params, None)?;
        let linear = CsrMatrix::sum(&[&a, &d])?.project(ru, ru);
        let divergence = asm.divergence().project(rp, ru);
        let (fu, fp) = asm.rhs(params, bc);
        let gauge = set.is_enclosed().then(|| coarse.cells().iter().map(|k| k.area()).collect());
        Ok(CoarseSolver {
            mesh,
            set,
            params: *params,
            proj,
            nonlinearity,
            exec,
            mass,
            linear,
            divergence,
            rhs_u: ru.matvec(&fu),
            rhs_p: rp.matvec(&fp),
            gauge,
        })
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn divergence(&self) -> &CsrMatrix {
        &self.divergence
    }

    fn nonlinear_block(&self, u_h: &[f64]) -> Result<Option<CsrMatrix>> {
        if self.nonlinearity.is_linear() {
            return Ok(None);
        }
        let u_ms = self.proj.reconstruct_velocity(u_h);
        let asm = Assembler::new(self.mesh, &self.set).with_execution(self.exec);
        let mut parts = Vec::new();
        if self.nonlinearity.convection {
            parts.push(asm.convection(&self.params, &u_ms)?);
        }
        if self.nonlinearity.forchheimer && self.params.forchheimer > 0.0 {
            parts.push(asm.forchheimer(&self.params, &u_ms)?);
        }
        if parts.is_empty() {
            return Ok(None);
        }
        let refs: Vec<&CsrMatrix> = parts.iter().collect();
        Ok(Some(CsrMatrix::sum(&refs)?.project(&self.proj.r_u, &self.proj.r_u)))
    }

    /// One coarse step; returns `(u_H, p_H, divergence residual)`.
    pub fn step(&self, u_h: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut rhs = self.mass.matvec(u_h);
        rhs.iter_mut().zip(&self.rhs_u).for_each(|(a, b)| *a += b);
        let k = match self.nonlinear_block(u_h)? {
            Some(nl) => CsrMatrix::sum(&[&self.mass, &self.linear, &nl])?,
            None => CsrMatrix::sum(&[&self.mass, &self.linear])?,
        };
        let f = SaddleFactorization::new(k, self.divergence.clone(), self.gauge.clone(), "coarse step")?;
        let (u, p) = f.solve(&rhs, &self.rhs_p)?;
        let r = divergence_residual(&self.divergence, &u, &self.rhs_p);
        Ok((u, p, r))
    }

    pub fn run(&self) -> Result<MultiscaleRun> {
        let n = self.params.n_steps;
        let (nu, np) = (self.proj.r_u.nrows(), self.proj.r_p.nrows());
        let mut states = vec![(vec![0.0; nu], vec![0.0; np])];
        let mut residuals = Vec::with_capacity(n);
        for l in 0..n {
            let (u, p, r) = self.step(&states[l].0)?;
            log::debug!("coarse step {}/{}: divergence residual {r:.2e}", l + 1, n);
            residuals.push(r);
            states.push((u, p));
        }
        let (u_h, p_h) = states.last().expect("initial layer").clone();
        let fine = DgState::new(self.proj.reconstruct_velocity(&u_h), self.proj.reconstruct_pressure(&p_h))?;
        let times = (0..=n).map(|l| l as f64 * self.params.time_step).collect();
        Ok(MultiscaleRun { coarse_states: states, times, divergence_residuals: residuals, fine, coarse_pressure: p_h })
    }
}

/// Offline and online stages for one `(M, oversampling)` choice.
pub fn run_multiscale(
    mesh: &TriMesh,
    coarse: &CoarseGrid,
    params: &ModelParameters,
    bc: &BoundaryData,
    m: usize,
    oversampled: bool,
) -> Result<MultiscaleRun> {
    let exec = Execution::default();
    let u_lin = compute_linearization_field_with(mesh, params, bc, exec)?;
    let space = MultiscaleSpace::build(mesh, coarse, params, &u_lin, BasisOptions { oversampled, ..Default::default() }, exec)?;
    let proj = space.projection(mesh, coarse, m)?;
    CoarseSolver::new(mesh, coarse, params, bc, &proj, Nonlinearity::FULL, exec)?.run()
}
