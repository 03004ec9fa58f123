//! Fixed-step RK4 integration and the two shipped systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result, StafError};
use crate::rkhs::Point;

/// `x' = q(x, t)`. The drift is assumed locally Lipschitz on the working
/// domain.
pub trait DynamicalSystem {
    fn dimension(&self) -> usize;
    fn drift(&self, x: &Point, t: f64) -> Point;
}

/// `x' = f(x) + g(x) u`.
pub trait ControlAffine {
    fn state_dimension(&self) -> usize;
    fn control_dimension(&self) -> usize;
    fn f(&self, x: &Point) -> Point;
    /// `n x m` input matrix.
    fn g(&self, x: &Point) -> DMatrix<f64>;
}

/// Axis-aligned box used as the declared working domain of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lower: Point,
    pub upper: Point,
}

impl BoxDomain {
    pub fn new(lower: Point, upper: Point) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(StafError::InvalidParameter(
                "domain lower bound exceeds upper bound".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    /// `[-half_width, half_width]^n`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(n, -half_width),
            DVector::from_element(n, half_width),
        )
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.len() == self.lower.len()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<S: DynamicalSystem + ?Sized>(
    system: &S,
    x: &Point,
    t: f64,
    dt: f64,
) -> Result<Point> {
    check_dim(system.dimension(), x.len())?;
    if !(dt > 0.0) {
        return Err(StafError::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let half = 0.5 * dt;
    let k1 = system.drift(x, t);
    let k2 = system.drift(&(x + &k1 * half), t + half);
    let k3 = system.drift(&(x + &k2 * half), t + half);
    let k4 = system.drift(&(x + &k3 * dt), t + dt);
    let next = x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(StafError::NonFinite { t: t + dt })
    }
}

/// Number of fixed steps covering `total_time`.
pub fn step_count(total_time: f64, dt: f64) -> usize {
    // tolerate representation error in total_time / dt
    (total_time / dt + 1e-9).floor() as usize
}

/// One row of a recorded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: Point,
}

/// Integrates from `x0` for `steps` steps, recording every state including
/// the initial one.
pub fn integrate<S: DynamicalSystem + ?Sized>(
    system: &S,
    x0: &Point,
    dt: f64,
    steps: usize,
) -> Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    out.push(TrajectoryRecord {
        t: 0.0,
        x: x.clone(),
    });
    for k in 0..steps {
        let t = k as f64 * dt;
        x = rk4_step(system, &x, t, dt)?;
        out.push(TrajectoryRecord {
            t: (k + 1) as f64 * dt,
            x: x.clone(),
        });
    }
    Ok(out)
}

/// `x' = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
}

impl DynamicalSystem for LinearSystem {
    fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    fn drift(&self, x: &Point, _t: f64) -> Point {
        &self.matrix * x
    }
}

/// The circular trajectory `x' = [[0, 1], [-1, 0]] x`.
pub fn circular_system() -> LinearSystem {
    LinearSystem {
        matrix: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
    }
}

/// Any system wrapped as a time-invariant drift `x' = q(x)`.
pub struct FnSystem<F> {
    dimension: usize,
    drift: F,
}

impl<F: Fn(&Point, f64) -> Point> FnSystem<F> {
    pub fn new(dimension: usize, drift: F) -> Self {
        Self { dimension, drift }
    }
}

impl<F: Fn(&Point, f64) -> Point> DynamicalSystem for FnSystem<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn drift(&self, x: &Point, t: f64) -> Point {
        (self.drift)(x, t)
    }
}

/// Which second drift component the regulator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegulatorDrift {
    /// `-x1/2 - x2 (1 - (cos 2x1 + 2)^2) / 2`, for which `V* = x1^2/2 + x2^2`
    /// and `u* = -(cos 2x1 + 2) x2` solve the HJB equation exactly.
    #[default]
    Standard,
    /// `-x1/2 - x2 (cos 2x1 + 2)^2 / 2`. Kept for comparison; the analytic
    /// `(V*, u*)` pair does not solve its HJB equation.
    Abbreviated,
}

/// Two-state control-affine regulator with `g(x) = (0, cos 2x1 + 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegulatorSystem {
    pub drift: RegulatorDrift,
}

pub fn regulator_system() -> RegulatorSystem {
    RegulatorSystem::default()
}

impl RegulatorSystem {
    /// `V*(x) = x1^2 / 2 + x2^2`.
    pub fn optimal_value(x: &Point) -> f64 {
        0.5 * x[0] * x[0] + x[1] * x[1]
    }

    pub fn optimal_value_gradient(x: &Point) -> Point {
        Point::from_vec(vec![x[0], 2.0 * x[1]])
    }

    /// `u*(x) = -(cos 2x1 + 2) x2`.
    pub fn optimal_control(x: &Point) -> DVector<f64> {
        DVector::from_element(1, -((2.0 * x[0]).cos() + 2.0) * x[1])
    }
}

impl ControlAffine for RegulatorSystem {
    fn state_dimension(&self) -> usize {
        2
    }

    fn control_dimension(&self) -> usize {
        1
    }

    fn f(&self, x: &Point) -> Point {
        let c = (2.0 * x[0]).cos() + 2.0;
        let second = match self.drift {
            RegulatorDrift::Standard => -0.5 * x[0] - 0.5 * x[1] * (1.0 - c * c),
            RegulatorDrift::Abbreviated => -0.5 * x[0] - 0.5 * x[1] * c * c,
        };
        Point::from_vec(vec![x[1] - x[0], second])
    }

    fn g(&self, x: &Point) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 1, &[0.0, (2.0 * x[0]).cos() + 2.0])
    }
}

/// A control-affine plant driven by a state feedback law.
pub struct ClosedLoop<'a, P: ?Sized, C> {
    pub plant: &'a P,
    pub controller: C,
}

impl<P, C> DynamicalSystem for ClosedLoop<'_, P, C>
where
    P: ControlAffine + ?Sized,
    C: Fn(&Point, f64) -> DVector<f64>,
{
    fn dimension(&self) -> usize {
        self.plant.state_dimension()
    }

    fn drift(&self, x: &Point, t: f64) -> Point {
        let u = (self.controller)(x, t);
        self.plant.f(x) + self.plant.g(x) * u
    }
}
