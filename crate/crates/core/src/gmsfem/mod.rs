//! Multiscale velocity space: local snapshots, spectral selection and the
//! projected coarse time loop.

pub mod cache;
mod multiscale;
mod snapshot;
mod spectral;

pub use multiscale::{build_projection, run_multiscale, BasisOptions, CoarseSolver, MultiscaleRun, MultiscaleSpace, Projection};
pub use snapshot::{
    build_snapshots, compatibility_constant, compute_linearization_field, compute_linearization_field_with, SnapshotProblem,
    SnapshotSet, DIRECTIONS,
};
pub use spectral::{
    compress_snapshots, generalized_eigen, spectral_operators, spectral_reduce, CellBasis, GeneralizedEigen, DEFLATION_THRESHOLD,
    REGULARIZATION_SHIFT,
    SINGULAR_THRESHOLD, SNAPSHOT_RANK_TOLERANCE,
};
