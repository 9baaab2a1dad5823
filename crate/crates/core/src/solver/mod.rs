//! Sparse symmetric positive definite linear algebra.

mod cg;
mod cholesky;
mod ordering;
mod sparse;

pub use cg::{conjugate_gradient, CgStats};
pub use cholesky::{CholeskyFactor, SymbolicCholesky};
pub use ordering::nested_dissection;
pub use sparse::SymCsr;
