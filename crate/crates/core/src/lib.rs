//! State-following (StaF) kernel function approximation.
//!
//! A StaF basis uses kernel functions whose centers travel with the system
//! state, `c_i(x) = x + d_i(x)`, so that a handful of kernels maintains an
//! accurate approximation near the current state instead of over the whole
//! domain.
//!
//! - [`rkhs`]: exponential kernel, Gram matrices, ideal weights.
//! - [`centers`]: center maps.
//! - [`chase`]: the Gradient Chase weight update and its diagnostics.
//! - [`expbounds`]: exponential-sum approximation of monomials and the
//!   center-count bound.
//! - [`dynamics`]: RK4 integration and the shipped systems.
//! - [`adp`]: approximate dynamic programming for the regulator problem.
//! - [`analysis`]: post-transient statistics used by the experiment driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adp;
pub mod analysis;
pub mod centers;
pub mod chase;
pub mod dynamics;
mod error;
pub mod expbounds;
pub mod rkhs;

pub use error::{Result, StafError};
pub use rkhs::Point;
