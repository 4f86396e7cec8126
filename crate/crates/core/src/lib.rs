//! Sparse recovery of Wigner-D expansions on the rotation group SO(3).
//!
//! The crate evaluates Wigner-D basis functions exactly (through Jacobi
//! polynomials), draws randomized sample points under two sampling measures
//! with matching preconditioners, recovers sparse coefficient vectors by
//! complex ℓ1 minimization and runs the Monte Carlo experiments built on top
//! of that pipeline: phase-transition grids, sup-norm scans of the
//! preconditioned basis and a spherical near-field measurement simulation.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod l1_solver;
pub mod nearfield;
pub mod quadrature;
pub mod sampling;
pub mod sensing;
pub mod special_functions;

pub use error::{Error, Result};
pub use num_complex::Complex64;
