//! Collocation boundary element solver for two-dimensional Helmholtz
//! transmission problems.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod fields;
pub mod formulations;
pub mod geometry;
pub mod krylov;
pub mod linalg;
pub mod operators;
pub mod specfun;
pub mod spectra;

pub use error::{Error, Result};
