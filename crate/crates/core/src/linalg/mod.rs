//! Numerical kernels shared by the spectral engine and the operators.

mod dense;
mod krylov;

pub use dense::{cholesky, solve_lower, solve_lower_transpose, symmetric_eigen, SymEigen};
pub use krylov::{top_eigenpairs, KrylovOptions, Which};
