//! State-following center maps `c_i(x) = x + d_i(x)`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Result, StafError};
use crate::rkhs::Point;

/// A user-supplied offset family.
pub trait OffsetFn: Send + Sync {
    fn dimension(&self) -> usize;
    fn count(&self) -> usize;
    fn offset(&self, i: usize, x: &Point) -> Point;

    /// Supremum of `||d_i(x)||` over the working domain.
    fn sup_norm(&self) -> f64;

    /// Jacobian of `d_i` at `x`; central differences unless overridden.
    fn offset_jacobian(&self, i: usize, x: &Point) -> DMatrix<f64> {
        let n = x.len();
        let h = 1e-6;
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let col = (self.offset(i, &xp) - self.offset(i, &xm)) / (2.0 * h);
            jac.set_column(k, &col);
        }
        jac
    }
}

#[derive(Clone)]
enum Offsets {
    /// Constant offsets on a circle: `radius (sin(2 pi i / M + phase), cos(...))`.
    Polygon {
        count: usize,
        radius: f64,
        phase: f64,
    },
    /// `gain (x^T x + floor) / (1 + x^T x) (cos(2 pi i / 3 + pi / 2), sin(...))`, i = 1..3.
    Shrinking {
        gain: f64,
        floor: f64,
    },
    Custom(Arc<dyn OffsetFn>),
}

/// `M` center functions `c_i(x) = x + d_i(x)` in a fixed order.
#[derive(Clone)]
pub struct CenterMap {
    dimension: usize,
    offsets: Offsets,
}

impl fmt::Debug for CenterMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.offsets {
            Offsets::Polygon { .. } => "polygon",
            Offsets::Shrinking { .. } => "shrinking",
            Offsets::Custom(_) => "custom",
        };
        f.debug_struct("CenterMap")
            .field("kind", &kind)
            .field("dimension", &self.dimension)
            .field("count", &self.count())
            .field("sup_offset_norm", &self.sup_offset_norm())
            .finish()
    }
}

/// Equilateral triangle of constant offsets, `d_i = radius (sin((i-1) 2 pi / 3), cos((i-1) 2 pi / 3))`.
pub fn triangle_centers(radius: f64) -> Result<CenterMap> {
    polygon_centers(3, radius, 0.0)
}

/// `count` constant offsets evenly spaced on a circle of `radius` in the plane.
pub fn polygon_centers(count: usize, radius: f64, phase: f64) -> Result<CenterMap> {
    if count == 0 {
        return Err(StafError::NoCenters);
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(StafError::InvalidParameter(format!(
            "center radius must be positive, got {radius}"
        )));
    }
    if !phase.is_finite() {
        return Err(StafError::InvalidParameter(
            "center phase must be finite".into(),
        ));
    }
    Ok(CenterMap {
        dimension: 2,
        offsets: Offsets::Polygon {
            count,
            radius,
            phase,
        },
    })
}

/// The three state-dependent centers of the regulator experiment, whose
/// offsets shrink to `0.007` at the origin and approach `0.7` far away.
pub fn adp_centers() -> CenterMap {
    CenterMap {
        dimension: 2,
        offsets: Offsets::Shrinking {
            gain: 0.7,
            floor: 0.01,
        },
    }
}

impl CenterMap {
    pub fn custom(offsets: Arc<dyn OffsetFn>) -> Self {
        Self {
            dimension: offsets.dimension(),
            offsets: Offsets::Custom(offsets),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn count(&self) -> usize {
        match &self.offsets {
            Offsets::Polygon { count, .. } => *count,
            Offsets::Shrinking { .. } => 3,
            Offsets::Custom(f) => f.count(),
        }
    }

    /// Supremum of `||d_i(x)||` over `R^n`. Any radius bound `r` strictly
    /// above this satisfies `||c_i(x) - x|| < r`.
    pub fn sup_offset_norm(&self) -> f64 {
        match &self.offsets {
            Offsets::Polygon { radius, .. } => *radius,
            Offsets::Shrinking { gain, floor } => gain * floor.max(1.0),
            Offsets::Custom(f) => f.sup_norm(),
        }
    }

    /// `d_i(x)`, zero-based `i`.
    pub fn offset(&self, i: usize, x: &Point) -> Point {
        match &self.offsets {
            Offsets::Polygon {
                count,
                radius,
                phase,
            } => {
                let angle = i as f64 * TAU / *count as f64 + phase;
                Point::from_vec(vec![radius * angle.sin(), radius * angle.cos()])
            }
            Offsets::Shrinking { gain, floor } => {
                let s = x.dot(x);
                let magnitude = gain * (s + floor) / (1.0 + s);
                let angle = TAU / 3.0 * (i + 1) as f64 + FRAC_PI_2;
                Point::from_vec(vec![magnitude * angle.cos(), magnitude * angle.sin()])
            }
            Offsets::Custom(f) => f.offset(i, x),
        }
    }

    /// Jacobian of `d_i` with respect to the state.
    pub fn offset_jacobian(&self, i: usize, x: &Point) -> DMatrix<f64> {
        match &self.offsets {
            Offsets::Polygon { .. } => DMatrix::zeros(2, 2),
            Offsets::Shrinking { gain, floor } => {
                let s = x.dot(x);
                // d/dx of gain (s + floor) / (1 + s) = gain (1 - floor) 2x / (1 + s)^2
                let dmag = x * (2.0 * gain * (1.0 - floor) / ((1.0 + s) * (1.0 + s)));
                let angle = TAU / 3.0 * (i + 1) as f64 + FRAC_PI_2;
                let dir = Point::from_vec(vec![angle.cos(), angle.sin()]);
                &dir * dmag.transpose()
            }
            Offsets::Custom(f) => f.offset_jacobian(i, x),
        }
    }

    /// `[x + d_1(x), ..., x + d_M(x)]`.
    pub fn eval_centers(&self, x: &Point) -> Result<Vec<Point>> {
        check_dim(self.dimension, x.len())?;
        Ok((0..self.count()).map(|i| x + self.offset(i, x)).collect())
    }
}
