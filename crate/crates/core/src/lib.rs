//! Fine-scale IPDG and GMsFEM multiscale solvers for two-dimensional
//! Navier-Stokes flow coupled with convective Darcy-Brinkman-Forchheimer
//! flow inside circular porous inclusions.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds the heterogeneous domain, the fine triangulation with
//!   oriented edge topology, and the structured coarse grid overlay.
//! * [`dg`] holds the P1-discontinuous / P0 spaces, quadrature, and the
//!   sparse assembly of every interior-penalty form.
//! * [`fine`] runs the implicit, linearised time loop on the fine mesh.
//! * [`gmsfem`] builds snapshot spaces, the spectral reduction and the
//!   projected coarse system.
//! * [`analysis`] computes relative error metrics and field statistics.
//! * [`io`] parses run configurations, drives runs and writes VTK/CSV output.

pub mod analysis;
pub mod dg;
mod error;
pub mod fine;
pub mod geometry;
pub mod gmsfem;
pub mod io;
pub mod parallel;
pub mod sparse;

pub use error::{Error, Result};
