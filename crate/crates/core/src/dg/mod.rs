//! Discrete spaces, quadrature and interior-penalty forms.

mod assembly;
mod cellset;
mod params;
pub mod quadrature;
mod space;

pub use assembly::{Assembler, IpdgTerms, TraceMass};
pub use cellset::{BoundaryFacet, CellSet, InteriorFacet};
pub use params::{BoundaryData, GradientFn, ModelParameters, Preset, VectorFn, DEFAULT_PENALTY};
pub use space::{cell_coefficients, eval_velocity, velocity_dof, velocity_gradient, DgState, P1Cell, VELOCITY_DOFS_PER_CELL};
