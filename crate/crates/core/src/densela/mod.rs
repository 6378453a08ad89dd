//! Dense kernels parameterized by a [`Format`](crate::precision::Format).
//!
//! Storage is binary64 throughout; the format only decides how each
//! arithmetic result is rounded.

mod kernels;
mod lu;
mod matrix;
mod norms;
mod qr;

pub use kernels::{
    combine, dot, givens, givens_checked, matvec, mgs_orthogonalize, norm2, norm2_quad, nrm2, scale_div, sub, Givens,
};
pub use lu::{
    abs_inverse, inverse_triangular, lu_factor, matvec_quad, tri_solve, tri_solve_quad, tri_solve_t_f64, LUFactors,
    Triangle,
};
pub use matrix::DenseMatrix;
pub use norms::{
    abs_product_norm, cond2_est, matrix_norm2, norm2_est, Estimate, Factor, LinearOp, POWER_MAX_ITER, POWER_TOL,
};
pub use qr::householder_qr;

pub(crate) use kernels::{givens_s, load_vec, store_vec};
pub(crate) use lu::{lu_factor_s, tri_solve_s};
