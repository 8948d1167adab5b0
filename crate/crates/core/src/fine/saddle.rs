//! Direct solution of the velocity-pressure block system
//!
//! ```text
//! [ K  Bᵀ ] [u]   [f_u]
//! [ B  0  ] [p] = [f_p]
//! ```
//!
//! with an optional mean-pressure constraint `wᵀ p = 0` for operators whose
//! pressure is only defined up to a constant. The constraint is imposed by
//! pinning the first pressure unknown and shifting afterwards, which keeps the
//! factorised matrix free of dense rows.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet as FaerTriplet};
use faer::Mat;

use crate::sparse::{norm, CsrMatrix};
use crate::{Error, Result};

/// Relative residual accepted for a block solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
const REFINEMENT_ROUNDS: usize = 2;

/// Assembled blocks of one linear step.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub mass: CsrMatrix,
    pub convection_diffusion: CsrMatrix,
    pub darcy_forchheimer: CsrMatrix,
    pub divergence: CsrMatrix,
    pub rhs_u: Vec<f64>,
    pub rhs_p: Vec<f64>,
}

impl SaddleSystem {
    /// Momentum block `M + A + D`.
    pub fn momentum(&self) -> Result<CsrMatrix> {
        CsrMatrix::sum(&[&self.mass, &self.convection_diffusion, &self.darcy_forchheimer])
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let n = self.mass.nrows();
        for (what, m) in [
            ("mass block", &self.mass),
            ("convection-diffusion block", &self.convection_diffusion),
            ("darcy-forchheimer block", &self.darcy_forchheimer),
        ] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { what, expected: n, found: m.nrows().max(m.ncols()) });
            }
        }
        if self.divergence.ncols() != n {
            return Err(Error::DimensionMismatch { what: "divergence columns", expected: n, found: self.divergence.ncols() });
        }
        if self.rhs_u.len() != n {
            return Err(Error::DimensionMismatch { what: "velocity load", expected: n, found: self.rhs_u.len() });
        }
        if self.rhs_p.len() != self.divergence.nrows() {
            return Err(Error::DimensionMismatch {
                what: "pressure load",
                expected: self.divergence.nrows(),
                found: self.rhs_p.len(),
            });
        }
        Ok(())
    }
}

/// LU factorisation of the block operator, reusable across right-hand sides.
pub struct SaddleFactorization {
    k: CsrMatrix,
    b: CsrMatrix,
    gauge: Option<Vec<f64>>,
    lu: Lu<usize, f64>,
    context: String,
}

impl std::fmt::Debug for SaddleFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SaddleFactorization")
            .field("n_velocity", &self.k.nrows())
            .field("n_pressure", &self.b.nrows())
            .field("gauge", &self.gauge.is_some())
            .finish()
    }
}

impl SaddleFactorization {
    /// Factorises `[[K, Bᵀ], [B, 0]]`, bordered by `w` when `gauge` is given.
    pub fn new(k: CsrMatrix, b: CsrMatrix, gauge: Option<Vec<f64>>, context: impl Into<String>) -> Result<Self> {
        let context = context.into();
        let (nu, np) = (k.nrows(), b.nrows());
        if k.ncols() != nu || b.ncols() != nu {
            return Err(Error::DimensionMismatch { what: "block operator", expected: nu, found: b.ncols() });
        }
        if let Some(w) = &gauge {
            if w.len() != np {
                return Err(Error::DimensionMismatch { what: "pressure gauge", expected: np, found: w.len() });
            }
            if np == 0 || w.iter().sum::<f64>() == 0.0 {
                return Err(Error::SingularSystem { context, detail: "pressure gauge has zero total weight".into() });
            }
        }
        // with a gauge, pressure 0 and its divergence row are dropped
        let pin = gauge.is_some() as usize;
        let n = nu + np - pin;
        let mut t = Vec::with_capacity(k.nnz() + 2 * b.nnz());
        t.extend(k.triplets().map(|(i, j, v)| FaerTriplet::new(i, j, v)));
        for (i, j, v) in b.triplets().filter(|&(i, _, _)| i >= pin) {
            t.push(FaerTriplet::new(nu + i - pin, j, v));
            t.push(FaerTriplet::new(j, nu + i - pin, v));
        }
        let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::SingularSystem { context: context.clone(), detail: format!("{e:?}") })?;
        let lu = matrix
            .sp_lu()
            .map_err(|e| Error::SingularSystem { context: context.clone(), detail: format!("LU failed: {e:?}") })?;
        Ok(SaddleFactorization { k, b, gauge, lu, context })
    }

    pub fn n_velocity(&self) -> usize {
        self.k.nrows()
    }

    pub fn n_pressure(&self) -> usize {
        self.b.nrows()
    }

    fn pin(&self) -> usize {
        self.gauge.is_some() as usize
    }

    fn dim(&self) -> usize {
        self.k.nrows() + self.b.nrows() - self.pin()
    }

    /// Applies the factorised (pinned) operator.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (nu, pin) = (self.n_velocity(), self.pin());
        let (u, rest) = x.split_at(nu);
        let mut p = vec![0.0; pin];
        p.extend_from_slice(rest);
        let mut y = self.k.matvec(u);
        for (yi, v) in y.iter_mut().zip(self.b.matvec_transpose(&p)) {
            *yi += v;
        }
        y.extend_from_slice(&self.b.matvec(u)[pin..]);
        y
    }

    fn lu_solve(&self, r: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(r.len(), 1, |i, _| r[i]);
        let x = self.lu.solve(&rhs);
        (0..r.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves for `(u, p)`. The relative residual of the factorised system is
    /// checked and improved by up to two rounds of iterative refinement.
    pub fn solve(&self, rhs_u: &[f64], rhs_p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (nu, np) = (self.n_velocity(), self.n_pressure());
        if rhs_u.len() != nu {
            return Err(Error::DimensionMismatch { what: "velocity load", expected: nu, found: rhs_u.len() });
        }
        if rhs_p.len() != np {
            return Err(Error::DimensionMismatch { what: "pressure load", expected: np, found: rhs_p.len() });
        }
        if rhs_u.iter().chain(rhs_p).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        let mut rhs = Vec::with_capacity(self.dim());
        rhs.extend_from_slice(rhs_u);
        rhs.extend_from_slice(&rhs_p[self.pin()..]);
        let scale = norm(&rhs);
        if scale == 0.0 {
            return Ok((vec![0.0; nu], vec![0.0; np]));
        }
        let mut x = self.lu_solve(&rhs);
        let mut rel = f64::INFINITY;
        for round in 0..=REFINEMENT_ROUNDS {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularSystem {
                    context: self.context.clone(),
                    detail: "factorisation produced non-finite values (zero pivot)".into(),
                });
            }
            let ax = self.apply(&x);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            rel = norm(&r) / scale;
            if rel <= RESIDUAL_TOLERANCE * 1e-3 || round == REFINEMENT_ROUNDS {
                break;
            }
            let dx = self.lu_solve(&r);
            x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
        }
        if !(rel <= RESIDUAL_TOLERANCE) {
            return Err(Error::SingularSystem {
                context: self.context.clone(),
                detail: format!("relative residual {rel:.3e} exceeds {RESIDUAL_TOLERANCE:.0e}"),
            });
        }
        let mut p = vec![0.0; self.pin()];
        p.extend(x.split_off(nu));
        if let Some(w) = &self.gauge {
            let shift = w.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
            p.iter_mut().for_each(|v| *v -= shift);
        }
        Ok((x, p))
    }
}

/// One-shot factorise-and-solve.
pub fn solve_saddle(
    k: &CsrMatrix,
    b: &CsrMatrix,
    rhs_u: &[f64],
    rhs_p: &[f64],
    gauge: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    SaddleFactorization::new(k.clone(), b.clone(), gauge.map(<[f64]>::to_vec), "block solve")?.solve(rhs_u, rhs_p)
}

/// `‖B u − f_p‖` relative to `max(‖f_p‖, ‖|B| |u|‖)`.
pub fn divergence_residual(b: &CsrMatrix, u: &[f64], rhs_p: &[f64]) -> f64 {
    let bu = b.matvec(u);
    let r: Vec<f64> = bu.iter().zip(rhs_p).map(|(a, f)| a - f).collect();
    let mut abs = vec![0.0; b.nrows()];
    for (i, j, v) in b.triplets() {
        abs[i] += (v * u[j]).abs();
    }
    let scale = norm(rhs_p).max(norm(&abs));
    if scale == 0.0 {
        0.0
    } else {
        norm(&r) / scale
    }
}
