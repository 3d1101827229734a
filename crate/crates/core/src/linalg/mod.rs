//! Dense complex linear algebra: storage, LU with partial pivoting and the
//! eigenvalue solver.

mod eigen;
mod lu;
mod matrix;

pub use eigen::{eigenvalues, hessenberg};
pub use lu::{lu_solve, LuDecomposition};
pub use matrix::{norm2, DenseComplexMatrix};
