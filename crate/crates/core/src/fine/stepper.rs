use super::saddle::{divergence_residual, SaddleFactorization, SaddleSystem};
use crate::dg::{Assembler, BoundaryData, CellSet, DgState, IpdgTerms, ModelParameters};
use crate::geometry::{Point, TriMesh};
use crate::parallel::Execution;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Which solution-dependent weights are taken from the previous layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nonlinearity {
    pub convection: bool,
    pub forchheimer: bool,
}

impl Nonlinearity {
    pub const FULL: Nonlinearity = Nonlinearity { convection: true, forchheimer: true };
    pub const LINEAR: Nonlinearity = Nonlinearity { convection: false, forchheimer: false };

    pub fn is_linear(self) -> bool {
        !self.convection && !self.forchheimer
    }
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Nonlinearity::FULL
    }
}

/// Time layers `0..=n_steps` with the divergence residual of every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DgState>,
    pub times: Vec<f64>,
    /// Relative `‖B u − F_p‖` of layers `1..=n_steps`.
    pub divergence_residuals: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DgState {
        self.states.last().expect("trajectory holds the initial layer")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Fine-scale implicit stepper on the whole mesh.
///
/// The parts of the block system that do not depend on the previous layer
/// are assembled once; convection and Forchheimer weights are rebuilt per
/// step unless disabled.
pub struct FineSolver<'a> {
    mesh: &'a TriMesh,
    set: CellSet,
    params: ModelParameters,
    nonlinearity: Nonlinearity,
    exec: Execution,
    mass: CsrMatrix,
    diffusion: CsrMatrix,
    darcy: CsrMatrix,
    /// `diffusion + darcy`.
    linear: CsrMatrix,
    divergence: CsrMatrix,
    rhs_u: Vec<f64>,
    rhs_p: Vec<f64>,
    linear_factor: Option<SaddleFactorization>,
}

impl<'a> FineSolver<'a> {
    pub fn new(mesh: &'a TriMesh, params: &ModelParameters, bc: &BoundaryData, nonlinearity: Nonlinearity) -> Result<Self> {
        Self::with_execution(mesh, params, bc, nonlinearity, Execution::default())
    }

    pub fn with_execution(
        mesh: &'a TriMesh,
        params: &ModelParameters,
        bc: &BoundaryData,
        nonlinearity: Nonlinearity,
        exec: Execution,
    ) -> Result<Self> {
        params.validate()?;
        let set = CellSet::whole(mesh);
        let asm = Assembler::new(mesh, &set).with_execution(exec);
        let mass = asm.mass(params);
        let diffusion = asm.ipdg(params, IpdgTerms::LINEAR, None)?;
        let darcy = asm.darcy_forchheimer(params, None)?;
        let linear = CsrMatrix::sum(&[&diffusion, &darcy])?;
        let divergence = asm.divergence();
        let (rhs_u, rhs_p) = asm.rhs(params, bc);
        Ok(FineSolver {
            mesh,
            set,
            params: *params,
            nonlinearity,
            exec,
            mass,
            diffusion,
            darcy,
            linear,
            divergence,
            rhs_u,
            rhs_p,
            linear_factor: None,
        })
    }

    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn cell_set(&self) -> &CellSet {
        &self.set
    }

    fn gauge(&self) -> Option<Vec<f64>> {
        self.set
            .is_enclosed()
            .then(|| self.set.cells().iter().map(|&c| self.mesh.area(c)).collect())
    }

    /// Solution-dependent part of the momentum block.
    fn nonlinear_block(&self, u_lin: &[f64]) -> Result<Option<CsrMatrix>> {
        let asm = Assembler::new(self.mesh, &self.set).with_execution(self.exec);
        let mut parts = Vec::new();
        if self.nonlinearity.convection {
            parts.push(asm.convection(&self.params, u_lin)?);
        }
        if self.nonlinearity.forchheimer && self.params.forchheimer > 0.0 {
            parts.push(asm.forchheimer(&self.params, u_lin)?);
        }
        if parts.is_empty() {
            return Ok(None);
        }
        let refs: Vec<&CsrMatrix> = parts.iter().collect();
        Ok(Some(CsrMatrix::sum(&refs)?))
    }

    /// Blocks of the step from `state` (linearised at its velocity).
    pub fn system(&self, state: &DgState) -> Result<SaddleSystem> {
        self.check_state(state)?;
        let asm = Assembler::new(self.mesh, &self.set).with_execution(self.exec);
        let mut rhs_u = self.mass.matvec(&state.velocity);
        rhs_u.iter_mut().zip(&self.rhs_u).for_each(|(a, b)| *a += b);
        let a = if self.nonlinearity.convection {
            CsrMatrix::sum(&[&self.diffusion, &asm.convection(&self.params, &state.velocity)?])?
        } else {
            self.diffusion.clone()
        };
        let d = if self.nonlinearity.forchheimer {
            CsrMatrix::sum(&[&self.darcy, &asm.forchheimer(&self.params, &state.velocity)?])?
        } else {
            self.darcy.clone()
        };
        Ok(SaddleSystem {
            mass: self.mass.clone(),
            convection_diffusion: a,
            darcy_forchheimer: d,
            divergence: self.divergence.clone(),
            rhs_u,
            rhs_p: self.rhs_p.clone(),
        })
    }

    fn check_state(&self, state: &DgState) -> Result<()> {
        if state.n_cells() != self.mesh.n_cells() || state.velocity.len() != 6 * self.mesh.n_cells() {
            return Err(Error::DimensionMismatch {
                what: "state cells",
                expected: self.mesh.n_cells(),
                found: state.n_cells(),
            });
        }
        state.check_finite()
    }

    /// Advances one layer; returns the new state and its divergence residual.
    pub fn step(&mut self, state: &DgState) -> Result<(DgState, f64)> {
        self.check_state(state)?;
        let mut rhs_u = self.mass.matvec(&state.velocity);
        rhs_u.iter_mut().zip(&self.rhs_u).for_each(|(a, b)| *a += b);
        let nonlinear = self.nonlinear_block(&state.velocity)?;
        let (u, p) = match nonlinear {
            None => {
                if self.linear_factor.is_none() {
                    let k = CsrMatrix::sum(&[&self.mass, &self.linear])?;
                    self.linear_factor =
                        Some(SaddleFactorization::new(k, self.divergence.clone(), self.gauge(), "fine step")?);
                }
                self.linear_factor.as_ref().expect("just built").solve(&rhs_u, &self.rhs_p)?
            }
            Some(nl) => {
                let k = CsrMatrix::sum(&[&self.mass, &self.linear, &nl])?;
                SaddleFactorization::new(k, self.divergence.clone(), self.gauge(), "fine step")?.solve(&rhs_u, &self.rhs_p)?
            }
        };
        let residual = divergence_residual(&self.divergence, &u, &self.rhs_p);
        let next = DgState::new(u, p)?;
        Ok((next, residual))
    }

    /// `n_steps` steps from the zero state.
    pub fn run(&mut self) -> Result<Trajectory> {
        let n = self.params.n_steps;
        let mut states = Vec::with_capacity(n + 1);
        let mut residuals = Vec::with_capacity(n);
        states.push(DgState::zeros(self.mesh.n_cells()));
        for l in 0..n {
            let (next, r) = self.step(&states[l])?;
            log::debug!("fine step {}/{}: divergence residual {r:.2e}", l + 1, n);
            residuals.push(r);
            states.push(next);
        }
        let times = (0..=n).map(|l| l as f64 * self.params.time_step).collect();
        Ok(Trajectory { states, times, divergence_residuals: residuals })
    }

    /// Steady linear problem `(A + D) u + Bᵀ p = F_u + ∫ f·v`, `B u = F_p`
    /// without the mass term; convection is omitted.
    pub fn solve_steady(&self, body_force: impl Fn(Point) -> [f64; 2] + Sync + Send) -> Result<DgState> {
        let asm = Assembler::new(self.mesh, &self.set).with_execution(self.exec);
        let mut rhs_u = asm.body_force(body_force);
        rhs_u.iter_mut().zip(&self.rhs_u).for_each(|(a, b)| *a += b);
        let f = SaddleFactorization::new(self.linear.clone(), self.divergence.clone(), self.gauge(), "steady solve")?;
        let (u, p) = f.solve(&rhs_u, &self.rhs_p)?;
        DgState::new(u, p)
    }
}

/// One step of the fully linearised scheme from `state`.
pub fn time_step(mesh: &TriMesh, params: &ModelParameters, bc: &BoundaryData, state: &DgState) -> Result<DgState> {
    Ok(FineSolver::new(mesh, params, bc, Nonlinearity::FULL)?.step(state)?.0)
}

/// Reference trajectory from the zero initial state.
pub fn run_fine(mesh: &TriMesh, params: &ModelParameters, bc: &BoundaryData) -> Result<Trajectory> {
    FineSolver::new(mesh, params, bc, Nonlinearity::FULL)?.run()
}
