//! Implicit fine-scale time stepping and block solves.

mod saddle;
mod stepper;

pub use saddle::{divergence_residual, solve_saddle, SaddleFactorization, SaddleSystem, RESIDUAL_TOLERANCE};
pub use stepper::{run_fine, time_step, FineSolver, Nonlinearity, Trajectory};
