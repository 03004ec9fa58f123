//! Kernel evaluation, Gram-matrix algebra and ideal-weight computation.
//!
//! The ideal weights for centers `c_1..c_M` are the coefficients of the
//! orthogonal projection of the target onto `span{K(., c_i)}`. They are
//! available two ways: a Cholesky solve of `K(c) w = V(c)` (the production
//! path) and the determinant-form Gram-Schmidt construction, which is kept as
//! an independent oracle.

mod gram;
mod kernel;
mod weights;

pub use gram::{GramMatrix, GramOptions};
pub use kernel::{exponential_kernel, ExponentialKernel, Kernel, TargetFunction};
pub use weights::{
    determinant, ideal_weights_gram_schmidt, ideal_weights_solve, rkhs_error_quadratic,
    solve_ideal_weights, DETERMINANT_FORM_MAX_CENTERS, MINOR_TOLERANCE,
};

use nalgebra::DVector;

/// A point in `R^n`.
pub type Point = DVector<f64>;
