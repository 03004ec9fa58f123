//! Approximation of monomials (and `exp(y^T x)` times a polynomial) by finite
//! sums of exponential kernel functions with constrained centers, and the
//! resulting bound on the number of kernel functions.
//!
//! Expanding `m^|a| prod_i (exp(y_i / m) - 1)^(a_i)` by the binomial theorem
//! gives
//!
//! ```text
//! m^|a| sum_{l <= a} prod_i C(a_i, l_i) (-1)^(|a| - |l|) exp(y^T l / m) = y^a + O(1/m)
//! ```
//!
//! so the monomial `y^a` is approximated by `prod (a_i + 1)` kernel functions
//! `exp(y^T c)` with centers `c = l / m`. Multiplying through by
//! `exp(y^T x)` shifts every center by `x`.
//!
//! The weights grow like `m^|a|` with alternating signs, so evaluation loses
//! roughly `eps (2m)^|a|` to cancellation while the truncation error shrinks
//! like `1/m`. [`scale_ceiling`] estimates where the two cross; beyond it,
//! doubling `m` no longer halves the observed error. For `r = 0.1` the
//! ceiling is roughly `m ~ 3e6` for `|a| = 1`, `1e4` for `|a| = 2`, `500` for
//! `|a| = 3` and `90` for `|a| = 4`.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::error::{check_dim, Result, StafError};
use crate::rkhs::Point;

/// Budget for `ln` of the largest weight magnitude (`ln f64::MAX ~ 709.8`).
pub const WEIGHT_LOG_BUDGET: f64 = 700.0;

/// A multi-index `(a_1, ..., a_n)` of nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Result<Self> {
        if components.is_empty() {
            return Err(StafError::InvalidParameter(
                "multi-index needs at least one component".into(),
            ));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// `|a| = sum a_i`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_component(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `y^a`.
    pub fn monomial(&self, y: &Point) -> f64 {
        self.0
            .iter()
            .zip(y.iter())
            .map(|(a, v)| v.powi(*a as i32))
            .product()
    }

    /// All `l` with `0 <= l_i <= a_i`, in lexicographic order.
    pub fn lattice_below(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::with_capacity(self.0.len())];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=a).map(move |l| {
                        let mut next = prefix.clone();
                        next.push(l);
                        next
                    })
                })
                .collect();
        }
        out
    }
}

/// A finite sum `sum_j w_j exp(y^T c_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialApproximant {
    pub weights: Vec<f64>,
    pub centers: Vec<Point>,
    /// Integer lattice points `l` with `c_j = shift + l / m`.
    pub lattice: Vec<Vec<u32>>,
    pub scale: u32,
}

impl MonomialApproximant {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Evaluates the kernel sum with Neumaier compensated summation.
    pub fn evaluate(&self, y: &Point) -> f64 {
        compensated_sum(
            self.weights
                .iter()
                .zip(&self.centers)
                .map(|(w, c)| w * y.dot(c).exp()),
        )
    }

    /// Largest distance from `from` to any center.
    pub fn max_center_distance(&self, from: &Point) -> f64 {
        self.centers
            .iter()
            .map(|c| (c - from).norm())
            .fold(0.0, f64::max)
    }
}

fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn check_weight_budget(alpha: &MultiIndex, m: u32) -> Result<()> {
    let log_magnitude = f64::from(alpha.order()) * f64::from(m).ln()
        + alpha
            .components()
            .iter()
            .map(|&a| binomial_f64(a, a / 2).ln())
            .sum::<f64>();
    if log_magnitude > WEIGHT_LOG_BUDGET {
        return Err(StafError::WeightOverflow {
            log_magnitude,
            budget: WEIGHT_LOG_BUDGET,
        });
    }
    Ok(())
}

/// Kernel-sum approximation of `y^alpha` with centers `l / m`.
pub fn monomial_approximant(alpha: &MultiIndex, m: u32) -> Result<MonomialApproximant> {
    shifted_approximant(alpha, m, &Point::zeros(alpha.dimension()))
}

/// Kernel-sum approximation of `exp(y^T x) y^alpha` with centers `x + l / m`.
pub fn shifted_approximant(alpha: &MultiIndex, m: u32, x: &Point) -> Result<MonomialApproximant> {
    check_dim(alpha.dimension(), x.len())?;
    if m == 0 {
        return Err(StafError::InvalidParameter(
            "scale m must be at least 1".into(),
        ));
    }
    check_weight_budget(alpha, m)?;
    let scale = f64::from(m).powi(alpha.order() as i32);
    let lattice = alpha.lattice_below();
    let mut weights = Vec::with_capacity(lattice.len());
    let mut centers = Vec::with_capacity(lattice.len());
    for l in &lattice {
        let coefficient: f64 = alpha
            .components()
            .iter()
            .zip(l)
            .map(|(&a, &li)| binomial_f64(a, li))
            .product();
        let parity = alpha.order() - l.iter().sum::<u32>();
        let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        weights.push(sign * scale * coefficient);
        centers.push(Point::from_fn(x.len(), |i, _| {
            x[i] + f64::from(l[i]) / f64::from(m)
        }));
    }
    Ok(MonomialApproximant {
        weights,
        centers,
        lattice,
        scale: m,
    })
}

/// `C(n + N + S, N + S)`, exact.
pub fn center_count_bound(n: u64, degree: u64, shift_degree: u64) -> Result<u128> {
    let k = degree
        .checked_add(shift_degree)
        .ok_or(StafError::BinomialOverflow {
            n: u64::MAX,
            k: u64::MAX,
        })?;
    let total = n
        .checked_add(k)
        .ok_or(StafError::BinomialOverflow { n: u64::MAX, k })?;
    binomial_exact(total, k)
}

/// Exact `C(n, k)` in `u128`, failing instead of wrapping.
pub fn binomial_exact(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k_small = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=u128::from(k_small) {
        // acc * (n - k + i) / i is an integer; cancel gcd(acc, i) first so
        // the product stays as small as possible.
        let numerator = u128::from(n - k_small) + i;
        let g = acc.gcd(&i);
        let (a, d) = (acc / g, i / g);
        acc = (numerator / d)
            .checked_mul(a)
            .ok_or(StafError::BinomialOverflow { n, k })?;
    }
    Ok(acc)
}

/// Merges the approximants of `exp(y^T x) sum_a p_a y^a` over a shared
/// center lattice `x + l / m`.
pub fn polynomial_to_exponential(
    coefficients: &[(MultiIndex, f64)],
    m: u32,
    x: &Point,
) -> Result<MonomialApproximant> {
    if m == 0 {
        return Err(StafError::InvalidParameter(
            "scale m must be at least 1".into(),
        ));
    }
    let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (alpha, coefficient) in coefficients {
        let part = shifted_approximant(alpha, m, x)?;
        for (l, w) in part.lattice.into_iter().zip(part.weights) {
            *merged.entry(l).or_insert(0.0) += coefficient * w;
        }
    }
    let mut weights = Vec::with_capacity(merged.len());
    let mut centers = Vec::with_capacity(merged.len());
    let mut lattice = Vec::with_capacity(merged.len());
    for (l, w) in merged {
        centers.push(Point::from_fn(x.len(), |i, _| {
            x[i] + f64::from(l[i]) / f64::from(m)
        }));
        weights.push(w);
        lattice.push(l);
    }
    Ok(MonomialApproximant {
        weights,
        centers,
        lattice,
        scale: m,
    })
}

/// Rough scale at which cancellation noise `eps (2m)^k` overtakes the
/// truncation error `k r^(k+1) / (2m)` for a monomial of order `k` on a ball
/// of radius `r`.
pub fn scale_ceiling(order: u32, radius: f64) -> f64 {
    if order == 0 {
        return f64::INFINITY;
    }
    let k = f64::from(order);
    let truncation = k * radius.powf(k + 1.0) / 2.0;
    let noise = f64::EPSILON * 2f64.powf(k);
    (truncation / noise).powf(1.0 / (k + 1.0))
}

/// Grid points of the closed ball of radius `r` about `center`, with
/// `per_axis` points along each coordinate of the bounding box.
pub fn ball_grid(center: &Point, r: f64, per_axis: usize) -> Vec<Point> {
    let n = center.len();
    let per_axis = per_axis.max(2);
    let step = 2.0 * r / (per_axis - 1) as f64;
    let total = per_axis.pow(n as u32);
    let mut out = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        let offset = Point::from_fn(n, |_, _| {
            let idx = rem % per_axis;
            rem /= per_axis;
            -r + idx as f64 * step
        });
        if offset.norm() <= r * (1.0 + 1e-12) {
            out.push(center + offset);
        }
    }
    out
}

/// `sup |approx(y) - f(y)|` over the given points.
pub fn sup_error<F: Fn(&Point) -> f64>(
    approx: &MonomialApproximant,
    f: F,
    points: &[Point],
) -> f64 {
    points
        .iter()
        .map(|y| (approx.evaluate(y) - f(y)).abs())
        .fold(0.0, f64::max)
}
