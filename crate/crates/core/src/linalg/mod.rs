//! Dense linear algebra: matrices, exact SVD and truncated pseudo-inverses.

mod lowrank;
mod matrix;
mod svd;

pub use lowrank::{
    apply_factors, apply_factors_matrix, truncate, truncated_pinv, LowRankFactors,
    SingularTriplets, DEFAULT_RCOND,
};
pub use matrix::{axpy, dot, norm, DenseMatrix};
pub use svd::{svd_dense, svd_leading, SvdResult, JACOBI_TOL};
