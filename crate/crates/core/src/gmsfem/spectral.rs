use nalgebra::{DMatrix, DVector};

use super::snapshot::SnapshotSet;
use crate::dg::{Assembler, CellSet, IpdgTerms, ModelParameters, TraceMass};
use crate::geometry::TriMesh;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Directions of the trace mass with eigenvalue at most this fraction of
/// the largest are treated as its null space and deflated.
pub const DEFLATION_THRESHOLD: f64 = 1e-8;
/// Fallback when deflation is impossible: `S^snap` is shifted if its smallest
/// eigenvalue drops below this fraction of its trace...
pub const SINGULAR_THRESHOLD: f64 = 1e-13;
/// ...by this fraction of `trace / J`.
pub const REGULARIZATION_SHIFT: f64 = 1e-12;
/// Snapshot directions with singular value below this fraction of the
/// largest are treated as numerically dependent and dropped.
pub const SNAPSHOT_RANK_TOLERANCE: f64 = 1e-8;

/// Finite spectrum of a symmetric pencil `A x = λ S x` with `S` positive
/// semi-definite.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are `S`-orthonormal eigenvectors in the order of `values`.
    pub vectors: DMatrix<f64>,
    /// `S` was singular; its null space was deflated (or, failing that, `S`
    /// was shifted).
    pub regularized: bool,
}

/// Symmetric generalized eigensolver.
///
/// With `S = Q Λ Qᵀ` split into a range part `Q₁` and a numerical null part
/// `Q₂`, the finite eigenpairs solve `(A₁₁ − A₁₂ A₂₂⁻¹ A₂₁) x₁ = λ Λ₁ x₁`
/// with `x₂ = −A₂₂⁻¹ A₂₁ x₁`. This is the zero-shift limit of a diagonal
/// regularisation and avoids the ill-conditioning of a Cholesky factor of a
/// nearly singular `S`. If `A₂₂` is not positive definite the pencil is
/// solved with a shifted `S` instead. Equal eigenvalues keep the order of the
/// reduced problem's decomposition (a stable sort).
pub fn generalized_eigen(a: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = a.nrows();
    if a.ncols() != n || s.nrows() != n || s.ncols() != n {
        return Err(Error::DimensionMismatch { what: "eigen pencil", expected: n, found: s.nrows() });
    }
    if a.iter().chain(s.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigen pencil"));
    }
    let a = 0.5 * (a + a.transpose());
    let s = 0.5 * (s + s.transpose());
    let se = s.clone().symmetric_eigen();
    let top = se.eigenvalues.max();
    if !(top > 0.0) {
        return Err(Error::SingularSystem { context: "snapshot trace mass".into(), detail: "no positive eigenvalue".into() });
    }
    let (range, null): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| se.eigenvalues[k] > DEFLATION_THRESHOLD * top);
    if null.is_empty() {
        return reduce(&a, &s, &se.eigenvectors, &se.eigenvalues, &range, None, false);
    }
    let q = &se.eigenvectors;
    let q2 = DMatrix::from_fn(n, null.len(), |i, k| q[(i, null[k])]);
    let a22 = q2.transpose() * &a * &q2;
    match a22.cholesky() {
        Some(chol) => {
            log::debug!("deflating {} of {n} trace-mass directions", null.len());
            reduce(&a, &s, q, &se.eigenvalues, &range, Some((&q2, &chol)), true)
        }
        None => shifted(&a, s.clone()),
    }
}

/// Eigenpairs on the range of `S`, optionally eliminating its null space.
fn reduce(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    q: &DMatrix<f64>,
    lambda: &DVector<f64>,
    range: &[usize],
    null: Option<(&DMatrix<f64>, &nalgebra::Cholesky<f64, nalgebra::Dyn>)>,
    regularized: bool,
) -> Result<GeneralizedEigen> {
    let n = a.nrows();
    // Z = Q₁ Λ₁^{-1/2}, then the harmonic correction Z − Q₂ A₂₂⁻¹ Q₂ᵀ A Z
    let mut z = DMatrix::from_fn(n, range.len(), |i, k| q[(i, range[k])] / lambda[range[k]].sqrt());
    if let Some((q2, chol)) = null {
        let coupling = q2.transpose() * (a * &z);
        z -= q2 * chol.solve(&coupling);
    }
    // Rayleigh-Ritz on span(Z) with the unmodified S; ZᵀSZ is close to I
    let g = z.transpose() * s * &z;
    let l = (0.5 * (&g + g.transpose())).cholesky().ok_or_else(|| Error::SingularSystem {
        context: "snapshot trace mass".into(),
        detail: "reduced mass not positive definite".into(),
    })?;
    let l = l.l();
    let za = z.transpose() * a * &z;
    let linv_a = l.solve_lower_triangular(&za).expect("non-singular factor");
    let c = l.solve_lower_triangular(&linv_a.transpose()).expect("non-singular factor");
    let c = 0.5 * (&c + c.transpose());
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..range.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(range.len(), range.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    let y = l.transpose().solve_upper_triangular(&y).expect("non-singular factor");
    Ok(GeneralizedEigen { values, vectors: z * y, regularized })
}

fn shifted(a: &DMatrix<f64>, mut s: DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = a.nrows();
    let trace = s.trace();
    let lambda_min = s.clone().symmetric_eigenvalues().min();
    let mut regularized = false;
    if !(lambda_min >= SINGULAR_THRESHOLD * trace) {
        let shift = REGULARIZATION_SHIFT * trace / n as f64;
        log::warn!("snapshot trace mass numerically singular (min eigenvalue {lambda_min:.3e}, trace {trace:.3e}); shifting by {shift:.3e}");
        for i in 0..n {
            s[(i, i)] += shift;
        }
        regularized = true;
    }
    let se = s.clone().symmetric_eigen();
    if se.eigenvalues.min() <= 0.0 {
        return Err(Error::SingularSystem {
            context: "snapshot trace mass".into(),
            detail: "not positive definite after regularisation".into(),
        });
    }
    let all: Vec<usize> = (0..n).collect();
    reduce(a, &s, &se.eigenvectors, &se.eigenvalues, &all, None, regularized)
}

/// All spectral basis candidates of one coarse cell.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub coarse_cell: usize,
    /// Fine cells of the coarse cell, ascending.
    pub cells: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// Basis functions in fine local layout (`6 * position + dof`), one per
    /// eigenvalue; any prefix of length `M` is the retained space.
    pub functions: Vec<Vec<f64>>,
    /// Number of raw snapshots before compression.
    pub n_snapshots: usize,
    /// Pencil in the coordinates of the compressed snapshot basis.
    pub a_snap: DMatrix<f64>,
    pub s_snap: DMatrix<f64>,
    /// Eigenvectors in compressed snapshot coordinates (columns).
    pub snap_vectors: DMatrix<f64>,
    pub regularized: bool,
}

impl CellBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `‖A ψ − λ S ψ‖ / ‖A‖` for pair `k` (Frobenius norm of `A`).
    pub fn eigen_residual(&self, k: usize) -> f64 {
        let x: DVector<f64> = self.snap_vectors.column(k).into_owned();
        let r = &self.a_snap * &x - self.eigenvalues[k] * (&self.s_snap * &x);
        let scale = self.a_snap.norm().max(f64::MIN_POSITIVE);
        r.norm() / scale
    }

    /// Largest `|ψ_a^T S ψ_b|`, `a ≠ b < m`, relative to the diagonal.
    pub fn s_orthogonality(&self, m: usize) -> f64 {
        let v = self.snap_vectors.columns(0, m);
        let g = v.transpose() * &self.s_snap * v;
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    worst = worst.max(g[(a, b)].abs() / (g[(a, a)] * g[(b, b)]).sqrt());
                }
            }
        }
        worst
    }
}

fn dense_project(m: &CsrMatrix, r: &DMatrix<f64>) -> DMatrix<f64> {
    // R M R^T with R dense (rows = snapshots)
    let (j, n) = r.shape();
    let mut mr = DMatrix::zeros(n, j);
    for (row, col, v) in m.triplets() {
        for k in 0..j {
            mr[(row, k)] += v * r[(k, col)];
        }
    }
    r * mr
}

/// Spectral problem data `(A, S)` of one coarse cell in fine local layout.
pub fn spectral_operators(
    mesh: &TriMesh,
    params: &ModelParameters,
    cells: Vec<usize>,
    mass: TraceMass,
) -> Result<(CsrMatrix, CsrMatrix)> {
    let set = CellSet::patch(mesh, cells)?;
    let asm = Assembler::new(mesh, &set).with_execution(crate::parallel::Execution::Sequential);
    Ok((asm.ipdg(params, IpdgTerms::SPECTRAL, None)?, asm.trace_mass(mass)))
}

/// Orthonormal basis (rows) of the numerical span of the snapshot rows.
///
/// Restricted oversampled snapshots are close to linearly dependent; with
/// the raw rows as coordinates both pencil matrices share a numerical null
/// space and the shifted problem returns noise as its lowest modes.
pub fn compress_snapshots(r: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = r.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.max();
    let mut keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > 0.0 && svd.singular_values[k] > SNAPSHOT_RANK_TOLERANCE * top)
        .collect();
    keep.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    DMatrix::from_fn(keep.len(), r.ncols(), |i, j| v_t[(keep[i], j)])
}

/// Reduces a snapshot set to its spectral basis. The pencil is posed on an
/// orthonormal basis of the snapshot span (see [`compress_snapshots`]) and
/// every eigenpair is kept; see [`CellBasis::functions`].
pub fn spectral_reduce(mesh: &TriMesh, params: &ModelParameters, snapshots: &SnapshotSet, mass: TraceMass) -> Result<CellBasis> {
    if snapshots.is_empty() {
        return Err(Error::EmptyPatch(snapshots.coarse_cell));
    }
    let (a, s) = spectral_operators(mesh, params, snapshots.cells.clone(), mass)?;
    let r = compress_snapshots(&snapshots.matrix());
    if r.nrows() == 0 {
        return Err(Error::EmptyPatch(snapshots.coarse_cell));
    }
    let a_snap = dense_project(&a, &r);
    let s_snap = dense_project(&s, &r);
    let eig = generalized_eigen(&a_snap, &s_snap)?;
    let psi = r.transpose() * &eig.vectors;
    let functions = (0..psi.ncols()).map(|k| psi.column(k).iter().copied().collect()).collect();
    Ok(CellBasis {
        coarse_cell: snapshots.coarse_cell,
        cells: snapshots.cells.clone(),
        eigenvalues: eig.values,
        functions,
        n_snapshots: snapshots.len(),
        a_snap,
        s_snap,
        snap_vectors: eig.vectors,
        regularized: eig.regularized,
    })
}
