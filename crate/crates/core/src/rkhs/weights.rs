use nalgebra::{DMatrix, DVector};

use super::{GramMatrix, Kernel, Point, TargetFunction};
use crate::error::{check_dim, Result, StafError};

/// Up to this many centers the Gram-Schmidt route expands determinants
/// literally; beyond it the same span is orthonormalized by modified
/// Gram-Schmidt in the kernel inner product.
pub const DETERMINANT_FORM_MAX_CENTERS: usize = 8;

/// Leading principal minors are normalized by the product of their diagonal
/// (Hadamard's bound, so the ratio lies in (0, 1]) before this test.
pub const MINOR_TOLERANCE: f64 = 1e-14;

/// Ideal weights `w = K(c)^{-1} V(c)` for a target sampled at the Gram
/// centers.
pub fn ideal_weights_solve<T: TargetFunction + ?Sized>(
    gram: &GramMatrix,
    target: &T,
) -> Result<DVector<f64>> {
    if gram.centers().is_empty() {
        return Err(StafError::InvalidParameter(
            "Gram matrix carries no centers to sample".into(),
        ));
    }
    solve_ideal_weights(gram, &target.sample(gram.centers()))
}

/// Solves `K(c) w = samples` by Cholesky factorization with one step of
/// iterative refinement.
pub fn solve_ideal_weights(gram: &GramMatrix, samples: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(gram.size(), samples.len())?;
    let chol = gram.cholesky()?;
    let mut w = chol.solve(samples);
    let residual = samples - gram.entries() * &w;
    w += chol.solve(&residual);
    Ok(w)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[(a, col)].abs().total_cmp(&m[(b, col)].abs()))
            .unwrap();
        if m[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap_rows(pivot, col);
            det = -det;
        }
        let p = m[(col, col)];
        det *= p;
        for row in (col + 1)..n {
            let factor = m[(row, col)] / p;
            if factor != 0.0 {
                for k in col..n {
                    m[(row, k)] -= factor * m[(col, k)];
                }
            }
        }
    }
    det
}

/// Ideal weights through the Gram-Schmidt construction, using only the
/// samples `V(c_1..c_M)`.
///
/// For `M <= 8` the orthonormal functions are built in determinant form,
///
/// ```text
/// u_m(x) = det[K(c_i, c_j) rows 1..m-1 ; K(x, c_j) last row] / sqrt(D_{m-1} D_m)
/// ```
///
/// with `D_m` the m-th leading principal minor. Expanding along the last row
/// writes `u_m` as a combination of `K(., c_l)`, and `<V, u_m>` follows from
/// the reproducing property. Larger sets switch to modified Gram-Schmidt in
/// the kernel inner product.
pub fn ideal_weights_gram_schmidt<K, T>(
    kernel: &K,
    centers: &[Point],
    target: &T,
) -> Result<DVector<f64>>
where
    K: Kernel + ?Sized,
    T: TargetFunction + ?Sized,
{
    if centers.is_empty() {
        return Err(StafError::NoCenters);
    }
    for c in centers {
        check_dim(kernel.dimension(), c.len())?;
    }
    let m = centers.len();
    let k = DMatrix::from_fn(m, m, |i, j| kernel.eval_unchecked(&centers[i], &centers[j]));
    let samples = target.sample(centers);
    let basis = if m <= DETERMINANT_FORM_MAX_CENTERS {
        determinant_basis(&k)?
    } else {
        orthonormal_basis(&k)?
    };
    let mut w = DVector::zeros(m);
    for coeffs in &basis {
        let projection = coeffs.dot(&samples);
        w += coeffs * projection;
    }
    Ok(w)
}

/// Coefficient vectors of `u_1..u_M` in the basis `K(., c_l)`.
fn determinant_basis(k: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let m = k.nrows();
    let mut minors = Vec::with_capacity(m + 1);
    minors.push(1.0);
    let mut diag_product = 1.0;
    for order in 1..=m {
        let d = determinant(k.view((0, 0), (order, order)).into_owned());
        diag_product *= k[(order - 1, order - 1)];
        if !(d / diag_product > MINOR_TOLERANCE) {
            return Err(StafError::DegenerateMinor { order, value: d });
        }
        minors.push(d);
    }

    let mut basis = Vec::with_capacity(m);
    for order in 1..=m {
        let scale = (minors[order - 1] * minors[order]).sqrt();
        let mut coeffs = DVector::zeros(m);
        for l in 0..order {
            // cofactor of the last-row entry in column l
            let cofactor = if order == 1 {
                1.0
            } else {
                let rows = order - 1;
                let minor = DMatrix::from_fn(rows, rows, |i, j| {
                    let col = if j < l { j } else { j + 1 };
                    k[(i, col)]
                });
                let sign = if (order - 1 + l) % 2 == 0 { 1.0 } else { -1.0 };
                sign * determinant(minor)
            };
            coeffs[l] = cofactor / scale;
        }
        basis.push(coeffs);
    }
    Ok(basis)
}

/// Modified Gram-Schmidt (two passes) in the inner product `<p, q> = p^T K q`.
fn orthonormal_basis(k: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let m = k.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
    for order in 0..m {
        let mut v = DVector::zeros(m);
        v[order] = 1.0;
        for _ in 0..2 {
            for u in &basis {
                let proj = u.dot(&(k * &v));
                v.axpy(-proj, u, 1.0);
            }
        }
        let norm2 = v.dot(&(k * &v));
        if !(norm2 / k[(order, order)] > MINOR_TOLERANCE) {
            return Err(StafError::DegenerateMinor {
                order: order + 1,
                value: norm2,
            });
        }
        basis.push(v / norm2.sqrt());
    }
    Ok(basis)
}

/// `(a - w)^T K(c) (a - w)`, which equals `F(a, c) - F(w, c)` without needing
/// the unknown `||V||_H^2`.
pub fn rkhs_error_quadratic(gram: &GramMatrix, a: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    check_dim(gram.size(), a.len())?;
    check_dim(gram.size(), w.len())?;
    let d = a - w;
    Ok(gram.quadratic_form(&d).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rkhs::ExponentialKernel;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    fn triangle_at(x: &[f64]) -> Vec<Point> {
        (0..3)
            .map(|i| {
                let angle = i as f64 * 2.0 * std::f64::consts::PI / 3.0;
                p(&[x[0] + 0.1 * angle.sin(), x[1] + 0.1 * angle.cos()])
            })
            .collect()
    }

    fn random_centers(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Point> {
        (0..m)
            .map(|_| Point::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(determinant(DMatrix::from_row_slice(1, 1, &[3.0])), 3.0);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(determinant(m), -2.0);
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 4.0, -3.0, 8.0]);
        assert_relative_eq!(determinant(m), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn target_in_span_of_one_center() {
        let k = ExponentialKernel::new(2);
        let c1 = p(&[0.2, 0.3]);
        let target = |y: &Point| 2.0 * y.dot(&c1).exp();
        let gram = GramMatrix::build(&k, std::slice::from_ref(&c1)).unwrap();
        let w = ideal_weights_solve(&gram, &target).unwrap();
        assert_relative_eq!(w[0], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn recovers_weights_of_targets_in_the_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = ExponentialKernel::new(2);
        for _ in 0..50 {
            let centers = random_centers(&mut rng, 2, 4);
            let b = DVector::from_fn(4, |_, _| rng.gen_range(-2.0..2.0));
            let target = |y: &Point| {
                centers
                    .iter()
                    .zip(b.iter())
                    .map(|(c, bi)| bi * y.dot(c).exp())
                    .sum::<f64>()
            };
            let gram = GramMatrix::build(&k, &centers).unwrap();
            if gram.condition_number() > 1e6 {
                continue;
            }
            let w = ideal_weights_solve(&gram, &target).unwrap();
            assert!((&w - &b).norm() <= 1e-8 * b.norm(), "w={w} b={b}");
        }
    }

    #[test]
    fn solve_residual_is_small() {
        let k = ExponentialKernel::new(2);
        let centers = triangle_at(&[1.0, 0.0]);
        let gram = GramMatrix::build(&k, &centers).unwrap();
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let w = solve_ideal_weights(&gram, &v).unwrap();
        assert!((gram.entries() * &w - &v).norm() <= 1e-10 * v.norm());
    }

    #[test]
    fn gram_schmidt_single_center() {
        let k = ExponentialKernel::new(2);
        let c = p(&[0.4, -0.1]);
        let target = |y: &Point| y[0].sin() + 3.0;
        let w = ideal_weights_gram_schmidt(&k, std::slice::from_ref(&c), &target).unwrap();
        assert_relative_eq!(w[0], target(&c) / c.dot(&c).exp(), max_relative = 1e-14);
    }

    #[test]
    fn gram_schmidt_exact_membership() {
        let k = ExponentialKernel::new(2);
        let c1 = p(&[0.0, 0.5]);
        let c2 = p(&[0.7, -0.2]);
        let target = |y: &Point| y.dot(&c2).exp();
        let w = ideal_weights_gram_schmidt(&k, &[c1, c2.clone()], &target).unwrap();
        assert!(w[0].abs() < 1e-12);
        assert_relative_eq!(w[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn gram_schmidt_matches_solve_on_chase_instance() {
        let k = ExponentialKernel::new(2);
        let centers = triangle_at(&[1.0, 0.0]);
        let target = |y: &Point| y[0] * y[0] + 5.0 * y[1] * y[1] + (y[0] * y[1]).tanh();
        let gram = GramMatrix::build(&k, &centers).unwrap();
        let ws = ideal_weights_solve(&gram, &target).unwrap();
        let wg = ideal_weights_gram_schmidt(&k, &centers, &target).unwrap();
        assert!((&ws - &wg).norm() <= 1e-8 * ws.norm());
    }

    #[test]
    fn gram_schmidt_matches_solve_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = ExponentialKernel::new(3);
        let mut checked = 0;
        while checked < 30 {
            let centers = random_centers(&mut rng, 3, 3);
            let gram = GramMatrix::build(&k, &centers).unwrap();
            if gram.condition_number() > 1e5 {
                continue;
            }
            let target = |y: &Point| (y[0] - y[2]).cos() + y[1].powi(3);
            let ws = ideal_weights_solve(&gram, &target).unwrap();
            let wg = ideal_weights_gram_schmidt(&k, &centers, &target).unwrap();
            assert!((&ws - &wg).norm() <= 1e-8 * ws.norm());
            checked += 1;
        }
    }

    #[test]
    fn large_center_sets_use_the_qr_route() {
        // 10 well-separated centers on a circle of radius 1.5
        let k = ExponentialKernel::new(2);
        let centers: Vec<Point> = (0..10)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 10.0;
                p(&[1.5 * t.cos(), 1.5 * t.sin()])
            })
            .collect();
        let target = |y: &Point| (y[0] * y[1]).sin();
        let gram = GramMatrix::build(&k, &centers).unwrap();
        let ws = ideal_weights_solve(&gram, &target).unwrap();
        let wg = ideal_weights_gram_schmidt(&k, &centers, &target).unwrap();
        assert!(
            (&ws - &wg).norm() <= 1e-6 * ws.norm(),
            "cond {}",
            gram.condition_number()
        );
    }

    #[test]
    fn degenerate_minors_are_rejected() {
        let k = ExponentialKernel::new(1);
        let c = p(&[0.3]);
        let err = ideal_weights_gram_schmidt(&k, &[c.clone(), c], &|_: &Point| 1.0).unwrap_err();
        assert!(matches!(err, StafError::DegenerateMinor { order: 2, .. }));
    }

    #[test]
    fn ill_conditioned_solve_is_refused() {
        let k = ExponentialKernel::new(1);
        let gram = GramMatrix::build(&k, &[p(&[0.3]), p(&[0.3 + 1e-9])]).unwrap();
        let err = solve_ideal_weights(&gram, &DVector::from_vec(vec![1.0, 1.0])).unwrap_err();
        assert!(matches!(err, StafError::IllConditioned { .. }));
    }

    #[test]
    fn quadratic_error_examples() {
        let gram = GramMatrix::from_entries(DMatrix::identity(3, 3)).unwrap();
        let w = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        assert_eq!(rkhs_error_quadratic(&gram, &w, &w).unwrap(), 0.0);
        let a = &w + DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_relative_eq!(rkhs_error_quadratic(&gram, &a, &w).unwrap(), 1.0);
        assert!(rkhs_error_quadratic(&gram, &DVector::zeros(2), &w).is_err());
    }

    #[test]
    fn quadratic_error_is_the_hilbert_norm_of_the_residual() {
        // V = sum b_i K(., c_i): ||sum (a_i - b_i) K(., c_i)||^2 expanded by
        // kernel sums must equal the quadratic form.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = ExponentialKernel::new(2);
        let centers = random_centers(&mut rng, 2, 4);
        let b = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
        let a = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
        let gram = GramMatrix::build(&k, &centers).unwrap();
        let target = |y: &Point| {
            centers
                .iter()
                .zip(b.iter())
                .map(|(c, bi)| bi * y.dot(c).exp())
                .sum::<f64>()
        };
        let w = ideal_weights_solve(&gram, &target).unwrap();
        let mut expanded = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                expanded +=
                    (a[i] - b[i]) * (a[j] - b[j]) * k.eval_unchecked(&centers[i], &centers[j]);
            }
        }
        let e = rkhs_error_quadratic(&gram, &a, &w).unwrap();
        assert_relative_eq!(e, expanded, max_relative = 1e-7);
    }
}
