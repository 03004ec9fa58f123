use nalgebra::DVector;

use super::Point;
use crate::error::{check_dim, Result};

/// A symmetric, strictly positive definite kernel on `R^n`.
pub trait Kernel: Send + Sync {
    fn dimension(&self) -> usize;

    /// Evaluates `K(x, y)` without checking dimensions.
    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64;

    /// Gradient of `x -> K(x, y)`.
    fn gradient_first(&self, x: &Point, y: &Point) -> Point;

    fn evaluate(&self, x: &Point, y: &Point) -> Result<f64> {
        check_dim(self.dimension(), x.len())?;
        check_dim(self.dimension(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }
}

/// `K(x, y) = exp(x^T y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentialKernel {
    dimension: usize,
}

impl ExponentialKernel {
    pub fn new(dimension: usize) -> Self {
        Self { dimension }
    }
}

impl Kernel for ExponentialKernel {
    fn dimension(&self) -> usize {
        self.dimension
    }

    #[inline]
    fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        x.dot(y).exp()
    }

    fn gradient_first(&self, x: &Point, y: &Point) -> Point {
        y * x.dot(y).exp()
    }
}

/// Evaluates the exponential kernel on raw slices.
pub fn exponential_kernel(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().exp())
}

/// A black-box sample oracle for the function being approximated.
pub trait TargetFunction {
    fn evaluate(&self, x: &Point) -> f64;

    /// `V(c) = (V(c_1), ..., V(c_M))`.
    fn sample(&self, centers: &[Point]) -> DVector<f64> {
        DVector::from_iterator(centers.len(), centers.iter().map(|c| self.evaluate(c)))
    }
}

impl<F> TargetFunction for F
where
    F: Fn(&Point) -> f64,
{
    fn evaluate(&self, x: &Point) -> f64 {
        self(x)
    }
}
