//! Gradient Chase: exact-line-search gradient descent on the kernel weights
//! while the centers follow a moving state.
//!
//! At fixed centers the objective is the quadratic
//! `F(a, c) = ||V||^2 - 2 V(c)^T a + a^T K(c) a`. Each time step freezes the
//! centers, runs a fixed number of descent iterations, and then advances the
//! state. The distance to the ideal weights is tracked through
//! `e = (a - w)^T K(c) (a - w)`, recomputed from scratch at every record.

use nalgebra::DVector;

use crate::centers::CenterMap;
use crate::dynamics::{rk4_step, step_count, BoxDomain, DynamicalSystem};
use crate::error::{check_dim, Result, StafError};
use crate::rkhs::{
    rkhs_error_quadratic, solve_ideal_weights, GramMatrix, GramOptions, Kernel, Point,
    TargetFunction,
};

/// Gradients with norm at or below this are treated as zero.
pub const ZERO_GRADIENT_TOLERANCE: f64 = 1e-14;

/// `g = -grad_a F(a, c) = 2 V(c) - 2 K(c) a`.
pub fn gradient(
    gram: &GramMatrix,
    samples: &DVector<f64>,
    a: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim(gram.size(), samples.len())?;
    check_dim(gram.size(), a.len())?;
    Ok((samples - gram.entries() * a) * 2.0)
}

/// Exact line-search step `g^T g / (2 g^T K g)` along `g`; zero when `g`
/// vanishes.
pub fn optimal_step(gram: &GramMatrix, g: &DVector<f64>) -> Result<f64> {
    check_dim(gram.size(), g.len())?;
    if g.norm() <= ZERO_GRADIENT_TOLERANCE {
        return Ok(0.0);
    }
    let curvature = gram.quadratic_form(g);
    if !(curvature > 0.0) {
        return Err(StafError::NotPositiveDefinite {
            min_eigenvalue: gram.smallest_eigenvalue(),
        });
    }
    Ok(g.dot(g) / (2.0 * curvature))
}

/// Kantorovich contraction factor `((A/a - 1) / (A/a + 1))^2` from the extreme
/// eigenvalues of the Gram matrix.
pub fn kantorovich_factor(gram: &GramMatrix) -> Result<f64> {
    if !gram.is_positive_definite() {
        return Err(StafError::NotPositiveDefinite {
            min_eigenvalue: gram.smallest_eigenvalue(),
        });
    }
    let ratio = gram.condition_number();
    let q = (ratio - 1.0) / (ratio + 1.0);
    Ok(q * q)
}

/// Runs `iterations` exact-line-search gradient steps at frozen centers.
pub fn descend(
    gram: &GramMatrix,
    samples: &DVector<f64>,
    a: &DVector<f64>,
    iterations: usize,
) -> Result<DVector<f64>> {
    let mut a = a.clone();
    for _ in 0..iterations {
        let g = gradient(gram, samples, &a)?;
        let step = optimal_step(gram, &g)?;
        if step == 0.0 {
            break;
        }
        a.axpy(step, &g, 1.0);
    }
    Ok(a)
}

/// Weights and diagnostics at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaseState {
    pub t: f64,
    pub x: Point,
    pub weights: DVector<f64>,
    /// Ideal weights `K(c)^{-1} V(c)` at the current centers (diagnostic only).
    pub ideal: DVector<f64>,
    /// `(a - w)^T K(c) (a - w)`.
    pub error: f64,
    /// Kantorovich factor of the current Gram matrix.
    pub contraction: f64,
}

impl ChaseState {
    /// State before any update; diagnostics are filled by [`chase_step`].
    pub fn initial(t: f64, x: Point, weights: DVector<f64>) -> Self {
        let m = weights.len();
        Self {
            t,
            x,
            weights,
            ideal: DVector::zeros(m),
            error: f64::NAN,
            contraction: f64::NAN,
        }
    }
}

/// Applies `iterations` descent steps at the centers of `gram` and refreshes
/// the diagnostics.
pub fn chase_step(
    state: &ChaseState,
    gram: &GramMatrix,
    samples: &DVector<f64>,
    iterations: usize,
) -> Result<ChaseState> {
    gram.check_conditioning()?;
    let weights = descend(gram, samples, &state.weights, iterations)?;
    let ideal = solve_ideal_weights(gram, samples)?;
    let error = rkhs_error_quadratic(gram, &weights, &ideal)?;
    let contraction = kantorovich_factor(gram)?;
    Ok(ChaseState {
        t: state.t,
        x: state.x.clone(),
        weights,
        ideal,
        error,
        contraction,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaseConfig {
    pub dt: f64,
    pub inner_iterations: usize,
    pub total_time: f64,
    pub initial_state: Point,
    pub initial_weights: DVector<f64>,
    /// Declared working domain; excursions are recorded as warnings.
    pub domain: Option<BoxDomain>,
    pub gram: GramOptions,
}

impl Default for ChaseConfig {
    /// The circular-trajectory experiment: 10 iterations every 0.01 s from
    /// zero weights, starting at `(1, 0)`.
    fn default() -> Self {
        Self {
            dt: 0.01,
            inner_iterations: 10,
            total_time: 20.0,
            initial_state: Point::from_vec(vec![1.0, 0.0]),
            initial_weights: DVector::zeros(3),
            domain: Some(BoxDomain::symmetric(2, 1.5).expect("valid box")),
            gram: GramOptions::default(),
        }
    }
}

impl ChaseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(StafError::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.inner_iterations == 0 {
            return Err(StafError::InvalidParameter(
                "inner_iterations must be at least 1".into(),
            ));
        }
        if !(self.total_time >= 0.0) || !self.total_time.is_finite() {
            return Err(StafError::InvalidParameter(format!(
                "total_time must be non-negative, got {}",
                self.total_time
            )));
        }
        Ok(())
    }
}

/// One recorded time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaseRecord {
    pub state: ChaseState,
    /// `V(x)`.
    pub target_value: f64,
    /// `sum a_i K(x, c_i(x))`.
    pub estimate: f64,
}

impl ChaseRecord {
    pub fn pointwise_error(&self) -> f64 {
        (self.target_value - self.estimate).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaseTrace {
    pub records: Vec<ChaseRecord>,
    /// Steps at which the state was outside the declared domain.
    pub domain_excursions: Vec<usize>,
}

/// Simulates the state with RK4 at step `dt`; at each step recomputes the
/// centers, Gram matrix and samples, applies [`chase_step`] and records the
/// result.
pub fn run_chase<S, K, T>(
    system: &S,
    kernel: &K,
    target: &T,
    centers: &CenterMap,
    config: &ChaseConfig,
) -> Result<ChaseTrace>
where
    S: DynamicalSystem + ?Sized,
    K: Kernel + ?Sized,
    T: TargetFunction + ?Sized,
{
    config.validate()?;
    check_dim(system.dimension(), config.initial_state.len())?;
    check_dim(centers.dimension(), config.initial_state.len())?;
    check_dim(centers.count(), config.initial_weights.len())?;

    let steps = step_count(config.total_time, config.dt);
    let mut records = Vec::with_capacity(steps);
    let mut domain_excursions = Vec::new();
    let mut state = ChaseState::initial(
        0.0,
        config.initial_state.clone(),
        config.initial_weights.clone(),
    );

    for k in 0..steps {
        let t = k as f64 * config.dt;
        state.t = t;
        if let Some(domain) = &config.domain {
            if !domain.contains(&state.x) {
                domain_excursions.push(k);
            }
        }
        let abort = |source: StafError| StafError::Aborted {
            step: k,
            source: Box::new(source),
        };
        let c = centers.eval_centers(&state.x).map_err(abort)?;
        let gram = GramMatrix::build_with(kernel, &c, config.gram).map_err(abort)?;
        let samples = target.sample(&c);
        state = chase_step(&state, &gram, &samples, config.inner_iterations).map_err(abort)?;

        let estimate = c
            .iter()
            .zip(state.weights.iter())
            .map(|(ci, ai)| ai * kernel.eval_unchecked(&state.x, ci))
            .sum();
        records.push(ChaseRecord {
            state: state.clone(),
            target_value: target.evaluate(&state.x),
            estimate,
        });

        state.x = rk4_step(system, &state.x, t, config.dt).map_err(abort)?;
    }

    Ok(ChaseTrace {
        records,
        domain_excursions,
    })
}

/// `V(x1, x2) = x1^2 + 5 x2^2 + tanh(x1 x2)`, the target of the circular
/// experiment.
pub fn circular_target(x: &Point) -> f64 {
    x[0] * x[0] + 5.0 * x[1] * x[1] + (x[0] * x[1]).tanh()
}
