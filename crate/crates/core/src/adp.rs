//! Approximate dynamic programming for the infinite-horizon regulator with a
//! state-following value basis.
//!
//! The value function is approximated by
//! `V(y; x, W) = sum_i W_i (exp(y^T c_i(x)) - 1)`, evaluated at `y = x`, and
//! the controller by `u(x, W_a) = -1/2 R^{-1} g(x)^T grad V(x, W_a)`.
//!
//! Weight adaptation (a documented stand-in, not a published law):
//!
//! * critic: `W_c' = -k_c w / (1 + w^T w)^2 * delta`, normalized gradient
//!   descent on the squared Bellman error with `w = d delta / d W_c`;
//! * actor: `W_a' = k_a (W_c - W_a)`.
//!
//! Both are integrated alongside the state with the same RK4 step.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::centers::CenterMap;
use crate::dynamics::{rk4_step, step_count, ControlAffine, FnSystem, RegulatorSystem};
use crate::error::{check_dim, Result, StafError};
use crate::rkhs::Point;

/// Running cost `x^T Q x + u^T R u`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    r_inverse: DMatrix<f64>,
}

fn check_spd(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(StafError::InvalidParameter(format!(
            "{name} must be square"
        )));
    }
    if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
        return Err(StafError::InvalidParameter(format!(
            "{name} must be symmetric"
        )));
    }
    let min_eigenvalue = m.clone().symmetric_eigenvalues().min();
    if !(min_eigenvalue > 0.0) {
        return Err(StafError::NotPositiveDefinite { min_eigenvalue });
    }
    Ok(())
}

impl CostSpec {
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        check_spd("Q", &q)?;
        check_spd("R", &r)?;
        let r_inverse =
            r.clone()
                .cholesky()
                .map(|c| c.inverse())
                .ok_or(StafError::NotPositiveDefinite {
                    min_eigenvalue: 0.0,
                })?;
        Ok(Self { q, r, r_inverse })
    }

    /// `Q = I_n`, `R = I_m`.
    pub fn identity(n: usize, m: usize) -> Self {
        Self::new(DMatrix::identity(n, n), DMatrix::identity(m, m)).expect("identity is SPD")
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn running_cost(&self, x: &Point, u: &DVector<f64>) -> f64 {
        x.dot(&(&self.q * x)) + u.dot(&(&self.r * u))
    }
}

/// How `grad V` treats the dependence of the centers on the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientConvention {
    /// Differentiate in the evaluation point with centers frozen at `x`.
    #[default]
    Partial,
    /// Differentiate `x -> V(x; x, W)`, including the center motion.
    Total,
}

/// State-following value parameterization.
#[derive(Debug, Clone)]
pub struct ValueModel {
    pub centers: CenterMap,
    pub convention: GradientConvention,
}

impl ValueModel {
    pub fn new(centers: CenterMap, convention: GradientConvention) -> Self {
        Self {
            centers,
            convention,
        }
    }

    pub fn weight_count(&self) -> usize {
        self.centers.count()
    }

    /// `sigma_i(x) = exp(x^T c_i(x)) - 1`.
    pub fn basis(&self, x: &Point) -> Result<DVector<f64>> {
        let c = self.centers.eval_centers(x)?;
        Ok(DVector::from_iterator(
            c.len(),
            c.iter().map(|ci| x.dot(ci).exp_m1()),
        ))
    }

    /// `n x M` matrix whose columns are the basis gradients.
    pub fn basis_gradients(&self, x: &Point) -> Result<DMatrix<f64>> {
        let c = self.centers.eval_centers(x)?;
        let mut out = DMatrix::zeros(x.len(), c.len());
        for (i, ci) in c.iter().enumerate() {
            let e = x.dot(ci).exp();
            let mut col = ci * e;
            if self.convention == GradientConvention::Total {
                // d/dx [x^T c_i(x)] = c_i + (I + J_d)^T x
                let jd = self.centers.offset_jacobian(i, x);
                col += (x + jd.transpose() * x) * e;
            }
            out.set_column(i, &col);
        }
        Ok(out)
    }
}

fn check_weights(model: &ValueModel, w: &DVector<f64>) -> Result<()> {
    check_dim(model.weight_count(), w.len())
}

/// `V(x; x, W)`.
pub fn value_hat(model: &ValueModel, x: &Point, w: &DVector<f64>) -> Result<f64> {
    check_weights(model, w)?;
    Ok(model.basis(x)?.dot(w))
}

/// `grad V(x, W)` under the model's gradient convention.
pub fn grad_value_hat(model: &ValueModel, x: &Point, w: &DVector<f64>) -> Result<Point> {
    check_weights(model, w)?;
    Ok(model.basis_gradients(x)? * w)
}

/// `-1/2 R^{-1} g(x)^T grad`.
pub fn control_from_gradient<P: ControlAffine + ?Sized>(
    system: &P,
    cost: &CostSpec,
    x: &Point,
    grad: &Point,
) -> DVector<f64> {
    -0.5 * &cost.r_inverse * system.g(x).transpose() * grad
}

pub fn control_hat<P: ControlAffine + ?Sized>(
    system: &P,
    cost: &CostSpec,
    model: &ValueModel,
    x: &Point,
    actor: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim(system.state_dimension(), x.len())?;
    let grad = grad_value_hat(model, x, actor)?;
    Ok(control_from_gradient(system, cost, x, &grad))
}

/// `x^T Q x + u^T R u + grad V . (f(x) + g(x) u)`.
pub fn bellman_residual<P: ControlAffine + ?Sized>(
    system: &P,
    cost: &CostSpec,
    x: &Point,
    grad: &Point,
    u: &DVector<f64>,
) -> f64 {
    let flow = system.f(x) + system.g(x) * u;
    cost.running_cost(x, u) + grad.dot(&flow)
}

/// Bellman error of the critic `W_c` under the actor's control.
pub fn bellman_error<P: ControlAffine + ?Sized>(
    system: &P,
    cost: &CostSpec,
    model: &ValueModel,
    x: &Point,
    actor: &DVector<f64>,
    critic: &DVector<f64>,
) -> Result<f64> {
    let u = control_hat(system, cost, model, x, actor)?;
    let grad = grad_value_hat(model, x, critic)?;
    Ok(bellman_residual(system, cost, x, &grad, &u))
}

/// Known optimal value and control, used only to report error traces.
#[derive(Clone, Copy)]
pub struct GroundTruth {
    pub value: fn(&Point) -> f64,
    pub control: fn(&Point) -> DVector<f64>,
}

impl std::fmt::Debug for GroundTruth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("GroundTruth")
    }
}

impl GroundTruth {
    /// `V*(x) = x1^2/2 + x2^2`, `u*(x) = -(cos 2x1 + 2) x2`.
    pub fn regulator() -> Self {
        Self {
            value: RegulatorSystem::optimal_value,
            control: RegulatorSystem::optimal_control,
        }
    }
}

/// Sum-of-sinusoids dither added to the applied control for `t < duration`.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub amplitude: f64,
    pub duration: f64,
    /// `(angular frequency, phase)` pairs.
    pub tones: Vec<(f64, f64)>,
}

impl Excitation {
    /// Four tones with phases drawn from `seed` by a fixed linear
    /// congruential sequence.
    pub fn with_seed(amplitude: f64, duration: f64, seed: u64) -> Self {
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let tones = [1.0, 2.3, 4.1, 7.7]
            .into_iter()
            .map(|omega| (omega, TAU * next()))
            .collect();
        Self {
            amplitude,
            duration,
            tones,
        }
    }

    pub fn signal(&self, t: f64) -> f64 {
        if t >= self.duration {
            return 0.0;
        }
        let n = self.tones.len().max(1) as f64;
        self.amplitude / n
            * self
                .tones
                .iter()
                .map(|(w, p)| (w * t + p).sin())
                .sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct AdpConfig {
    pub initial_state: Point,
    pub initial_critic: DVector<f64>,
    pub initial_actor: DVector<f64>,
    pub dt: f64,
    pub total_time: f64,
    pub critic_gain: f64,
    pub actor_gain: f64,
    /// Abort when `||x||` exceeds this.
    pub state_cap: f64,
    /// Abort when `||W_c||` or `||W_a||` exceeds this.
    pub weight_cap: f64,
    pub excitation: Option<Excitation>,
    pub ground_truth: Option<GroundTruth>,
}

impl Default for AdpConfig {
    /// Regulator run from `(-1, 1)` for 40 s at 0.01 s with unit weights and
    /// unit gains.
    fn default() -> Self {
        Self {
            initial_state: Point::from_vec(vec![-1.0, 1.0]),
            initial_critic: DVector::from_element(3, 1.0),
            initial_actor: DVector::from_element(3, 1.0),
            dt: 0.01,
            total_time: 40.0,
            critic_gain: 1.0,
            actor_gain: 1.0,
            state_cap: 1e3,
            weight_cap: 1e6,
            excitation: None,
            ground_truth: Some(GroundTruth::regulator()),
        }
    }
}

impl AdpConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(StafError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("dt", self.dt)?;
        positive("state_cap", self.state_cap)?;
        positive("weight_cap", self.weight_cap)?;
        if !(self.total_time >= 0.0) || !self.total_time.is_finite() {
            return Err(StafError::InvalidParameter(format!(
                "total_time must be non-negative, got {}",
                self.total_time
            )));
        }
        if !(self.critic_gain >= 0.0 && self.actor_gain >= 0.0) {
            return Err(StafError::InvalidParameter(
                "gains must be non-negative".into(),
            ));
        }
        check_dim(self.initial_critic.len(), self.initial_actor.len())
    }
}

/// One recorded instant of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdpState {
    pub t: f64,
    pub x: Point,
    pub critic: DVector<f64>,
    pub actor: DVector<f64>,
    /// `u(x, W_a)` before any dither.
    pub control: DVector<f64>,
    pub bellman_error: f64,
    /// `|V(x, W_c) - V*(x)|` when ground truth is configured.
    pub value_error: Option<f64>,
    /// `||u(x, W_a) - u*(x)||` when ground truth is configured.
    pub control_error: Option<f64>,
}

struct Layout {
    n: usize,
    m: usize,
}

impl Layout {
    fn split(&self, z: &Point) -> (Point, DVector<f64>, DVector<f64>) {
        (
            z.rows(0, self.n).into_owned(),
            z.rows(self.n, self.m).into_owned(),
            z.rows(self.n + self.m, self.m).into_owned(),
        )
    }

    fn join(&self, x: &Point, critic: &DVector<f64>, actor: &DVector<f64>) -> Point {
        let mut z = Point::zeros(self.n + 2 * self.m);
        z.rows_mut(0, self.n).copy_from(x);
        z.rows_mut(self.n, self.m).copy_from(critic);
        z.rows_mut(self.n + self.m, self.m).copy_from(actor);
        z
    }
}

/// Closed-loop simulation with online critic and actor adaptation.
pub fn run_adp<P: ControlAffine + ?Sized>(
    system: &P,
    cost: &CostSpec,
    model: &ValueModel,
    config: &AdpConfig,
) -> Result<Vec<AdpState>> {
    config.validate()?;
    let n = system.state_dimension();
    let m = model.weight_count();
    check_dim(n, config.initial_state.len())?;
    check_dim(model.centers.dimension(), n)?;
    check_dim(m, config.initial_critic.len())?;
    check_dim(cost.q().nrows(), n)?;
    check_dim(cost.r().nrows(), system.control_dimension())?;

    let layout = Layout { n, m };
    let augmented = FnSystem::new(n + 2 * m, |z: &Point, t: f64| {
        let (x, critic, actor) = layout.split(z);
        // dimensions were checked above, so these cannot fail
        let sigma_grad = model.basis_gradients(&x).expect("checked dimensions");
        let u = control_from_gradient(system, cost, &x, &(&sigma_grad * &actor));
        let mut applied = u.clone();
        if let Some(ex) = &config.excitation {
            applied.add_scalar_mut(ex.signal(t));
        }
        let x_dot = system.f(&x) + system.g(&x) * &applied;

        let omega = sigma_grad.transpose() * (system.f(&x) + system.g(&x) * &u);
        let delta = cost.running_cost(&x, &u) + critic.dot(&omega);
        let norm = 1.0 + omega.dot(&omega);
        let critic_dot = &omega * (-config.critic_gain * delta / (norm * norm));
        let actor_dot = (&critic - &actor) * config.actor_gain;
        layout.join(&x_dot, &critic_dot, &actor_dot)
    });

    let steps = step_count(config.total_time, config.dt);
    let mut trace = Vec::with_capacity(steps);
    let mut z = layout.join(
        &config.initial_state,
        &config.initial_critic,
        &config.initial_actor,
    );
    for k in 0..steps {
        let t = k as f64 * config.dt;
        let (x, critic, actor) = layout.split(&z);
        let control = control_hat(system, cost, model, &x, &actor)?;
        let critic_grad = grad_value_hat(model, &x, &critic)?;
        let bellman_error = bellman_residual(system, cost, &x, &critic_grad, &control);
        let (value_error, control_error) = match &config.ground_truth {
            Some(gt) => (
                Some((value_hat(model, &x, &critic)? - (gt.value)(&x)).abs()),
                Some((&control - (gt.control)(&x)).norm()),
            ),
            None => (None, None),
        };
        trace.push(AdpState {
            t,
            x,
            critic,
            actor,
            control,
            bellman_error,
            value_error,
            control_error,
        });

        z = rk4_step(&augmented, &z, t, config.dt).map_err(|source| StafError::Aborted {
            step: k,
            source: Box::new(source),
        })?;
        let (x, critic, actor) = layout.split(&z);
        if x.norm() > config.state_cap {
            return Err(StafError::Diverged {
                step: k + 1,
                what: "state",
                norm: x.norm(),
                cap: config.state_cap,
            });
        }
        let w = critic.norm().max(actor.norm());
        if w > config.weight_cap {
            return Err(StafError::Diverged {
                step: k + 1,
                what: "weight",
                norm: w,
                cap: config.weight_cap,
            });
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centers::adp_centers;
    use crate::dynamics::{regulator_system, RegulatorDrift};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    fn model(convention: GradientConvention) -> ValueModel {
        ValueModel::new(adp_centers(), convention)
    }

    #[test]
    fn value_vanishes_at_origin_and_for_zero_weights() {
        let m = model(GradientConvention::Partial);
        assert_eq!(
            value_hat(&m, &p(&[0.0, 0.0]), &p(&[3.0, -1.0, 2.0])).unwrap(),
            0.0
        );
        assert_eq!(
            value_hat(&m, &p(&[0.7, -0.4]), &DVector::zeros(3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn value_composes_centers_and_kernel() {
        let m = model(GradientConvention::Partial);
        let x = p(&[1.0, 0.0]);
        let c1 = adp_centers().eval_centers(&x).unwrap()[0].clone();
        let v = value_hat(&m, &x, &p(&[1.0, 0.0, 0.0])).unwrap();
        assert_relative_eq!(v, x.dot(&c1).exp() - 1.0, max_relative = 1e-15);
    }

    #[test]
    fn gradient_examples() {
        for conv in [GradientConvention::Partial, GradientConvention::Total] {
            let m = model(conv);
            let g = grad_value_hat(&m, &p(&[0.4, 0.1]), &DVector::zeros(3)).unwrap();
            assert_eq!(g, p(&[0.0, 0.0]));
            let w = p(&[0.3, -1.2, 2.0]);
            let origin = p(&[0.0, 0.0]);
            let g = grad_value_hat(&m, &origin, &w).unwrap();
            let centers = adp_centers().eval_centers(&origin).unwrap();
            let expected = centers
                .iter()
                .zip(w.iter())
                .fold(p(&[0.0, 0.0]), |acc, (c, wi)| acc + c * *wi);
            assert_relative_eq!((g - expected).norm(), 0.0, epsilon = 1e-16);
        }
    }

    #[test]
    fn partial_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = model(GradientConvention::Partial);
        for _ in 0..100 {
            let x = p(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let w = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
            let centers = adp_centers().eval_centers(&x).unwrap();
            let frozen = |y: &Point| -> f64 {
                centers
                    .iter()
                    .zip(w.iter())
                    .map(|(c, wi)| wi * y.dot(c).exp_m1())
                    .sum()
            };
            let g = grad_value_hat(&m, &x, &w).unwrap();
            let fd = central_difference(frozen, &x);
            assert!((&g - &fd).norm() <= 1e-5 * g.norm().max(1e-3));
        }
    }

    #[test]
    fn total_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = model(GradientConvention::Total);
        for _ in 0..100 {
            let x = p(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let w = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
            let g = grad_value_hat(&m, &x, &w).unwrap();
            let fd = central_difference(|y: &Point| value_hat(&m, y, &w).unwrap(), &x);
            assert!((&g - &fd).norm() <= 1e-5 * g.norm().max(1e-3));
        }
    }

    fn central_difference<F: Fn(&Point) -> f64>(f: F, x: &Point) -> Point {
        let h = 1e-6;
        Point::from_fn(x.len(), |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
    }

    #[test]
    fn control_examples() {
        let sys = regulator_system();
        let cost = CostSpec::identity(2, 1);
        let m = model(GradientConvention::Partial);
        let u = control_hat(&sys, &cost, &m, &p(&[0.5, -0.3]), &DVector::zeros(3)).unwrap();
        assert_eq!(u[0], 0.0);

        // at the origin the centers have norm 0.007 and g(0) = (0, 3)
        let w = p(&[0.8, -1.5, 2.0]);
        let u = control_hat(&sys, &cost, &m, &p(&[0.0, 0.0]), &w).unwrap();
        let bound = 0.5 * 0.007 * 3.0 * w.lp_norm(1);
        assert!(u[0].abs() <= bound);
        let centers = adp_centers().eval_centers(&p(&[0.0, 0.0])).unwrap();
        let grad_y: f64 = centers.iter().zip(w.iter()).map(|(c, wi)| c[1] * wi).sum();
        assert_relative_eq!(u[0], -0.5 * 3.0 * grad_y, max_relative = 1e-14);
    }

    #[test]
    fn control_respects_r() {
        let sys = regulator_system();
        let cost =
            CostSpec::new(DMatrix::identity(2, 2), DMatrix::from_element(1, 1, 4.0)).unwrap();
        let m = model(GradientConvention::Partial);
        let x = p(&[0.2, 0.6]);
        let w = p(&[1.0, 1.0, 1.0]);
        let u4 = control_hat(&sys, &cost, &m, &x, &w).unwrap();
        let u1 = control_hat(&sys, &CostSpec::identity(2, 1), &m, &x, &w).unwrap();
        assert_relative_eq!(u4[0] * 4.0, u1[0], max_relative = 1e-14);
    }

    #[test]
    fn bellman_error_vanishes_at_origin_with_zero_actor() {
        let sys = regulator_system();
        let cost = CostSpec::identity(2, 1);
        let m = model(GradientConvention::Partial);
        let be = bellman_error(
            &sys,
            &cost,
            &m,
            &p(&[0.0, 0.0]),
            &DVector::zeros(3),
            &p(&[1.0, -2.0, 0.5]),
        )
        .unwrap();
        assert_eq!(be, 0.0);
    }

    #[test]
    fn analytic_pair_solves_hjb() {
        let sys = regulator_system();
        let cost = CostSpec::identity(2, 1);
        for i in 0..21 {
            for j in 0..21 {
                let x = p(&[-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64]);
                let grad = RegulatorSystem::optimal_value_gradient(&x);
                let u = RegulatorSystem::optimal_control(&x);
                // u* is the minimizer of the Hamiltonian for V*
                let from_grad = control_from_gradient(&sys, &cost, &x, &grad);
                assert_relative_eq!(from_grad[0], u[0], epsilon = 1e-14);
                let be = bellman_residual(&sys, &cost, &x, &grad, &u);
                assert!(be.abs() < 1e-10, "x = {x}, residual {be}");
            }
        }
    }

    #[test]
    fn abbreviated_drift_does_not_satisfy_hjb() {
        let sys = RegulatorSystem {
            drift: RegulatorDrift::Abbreviated,
        };
        let cost = CostSpec::identity(2, 1);
        let x = p(&[0.3, 0.5]);
        let be = bellman_residual(
            &sys,
            &cost,
            &x,
            &RegulatorSystem::optimal_value_gradient(&x),
            &RegulatorSystem::optimal_control(&x),
        );
        // residual works out to x2^2 - 2 (cos 2x1 + 2)^2 x2^2
        let c = (0.6f64).cos() + 2.0;
        assert_relative_eq!(be, 0.25 - 2.0 * c * c * 0.25, max_relative = 1e-12);
    }

    #[test]
    fn bellman_error_matches_recomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sys = regulator_system();
        let cost = CostSpec::identity(2, 1);
        for conv in [GradientConvention::Partial, GradientConvention::Total] {
            let m = model(conv);
            for _ in 0..50 {
                let x = p(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
                let wa = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
                let wc = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
                let be = bellman_error(&sys, &cost, &m, &x, &wa, &wc).unwrap();

                let grad_a = grad_value_hat(&m, &x, &wa).unwrap();
                let grad_c = grad_value_hat(&m, &x, &wc).unwrap();
                let gx = (2.0 * x[0]).cos() + 2.0;
                let u = -0.5 * gx * grad_a[1];
                let f = sys.f(&x);
                let expected = x[0] * x[0]
                    + x[1] * x[1]
                    + u * u
                    + grad_c[0] * f[0]
                    + grad_c[1] * (f[1] + gx * u);
                assert_relative_eq!(be, expected, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cost_spec_validation() {
        assert!(CostSpec::new(DMatrix::identity(2, 2), DMatrix::from_element(1, 1, 0.0)).is_err());
        assert!(CostSpec::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
            DMatrix::identity(1, 1)
        )
        .is_err());
        assert!(CostSpec::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
            DMatrix::identity(1, 1)
        )
        .is_err());
    }

    #[test]
    fn equilibrium_run_stays_at_origin() {
        let config = AdpConfig {
            initial_state: p(&[0.0, 0.0]),
            total_time: 5.0,
            ..AdpConfig::default()
        };
        let trace = run_adp(
            &regulator_system(),
            &CostSpec::identity(2, 1),
            &model(GradientConvention::Partial),
            &config,
        )
        .unwrap();
        assert_eq!(trace.len(), 500);
        // equal weights cancel the offsets, so the origin is an equilibrium
        for s in &trace {
            assert!(s.x.norm() < 1e-12);
            assert!(s.critic.norm() < 10.0 && s.actor.norm() < 10.0);
        }
    }

    #[test]
    fn divergence_guard_aborts() {
        let config = AdpConfig {
            initial_critic: DVector::zeros(3),
            initial_actor: DVector::zeros(3),
            critic_gain: 0.0,
            state_cap: 5.0,
            total_time: 20.0,
            ..AdpConfig::default()
        };
        // zero actor leaves the open-loop drift, which is unstable at the origin
        let err = run_adp(
            &regulator_system(),
            &CostSpec::identity(2, 1),
            &model(GradientConvention::Partial),
            &config,
        )
        .unwrap_err();
        assert!(matches!(err, StafError::Diverged { what: "state", .. }));
    }

    #[test]
    fn excitation_is_deterministic_and_windowed() {
        let a = Excitation::with_seed(0.5, 2.0, 42);
        let b = Excitation::with_seed(0.5, 2.0, 42);
        assert_eq!(a, b);
        assert_ne!(a, Excitation::with_seed(0.5, 2.0, 43));
        assert_eq!(a.signal(2.0), 0.0);
        assert!(a.signal(0.3).abs() <= 0.5);
    }
}
