use nalgebra::{linalg::Cholesky, DMatrix, DVector, Dyn};

use super::{Kernel, Point};
use crate::error::{check_dim, Result, StafError};

/// Numerical guards applied to Gram matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramOptions {
    /// Centers closer than this are flagged as duplicates.
    pub duplicate_tolerance: f64,
    /// Largest eigenvalue ratio accepted by solves.
    pub condition_cap: f64,
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            duplicate_tolerance: 1e-12,
            condition_cap: 1e12,
        }
    }
}

/// The kernel matrix `K(c) = (K(c_i, c_j))` together with its extreme
/// eigenvalues.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    centers: Vec<Point>,
    entries: DMatrix<f64>,
    largest_eigenvalue: f64,
    smallest_eigenvalue: f64,
    duplicate_pair: Option<(usize, usize)>,
    options: GramOptions,
}

impl GramMatrix {
    pub fn build<K: Kernel + ?Sized>(kernel: &K, centers: &[Point]) -> Result<Self> {
        Self::build_with(kernel, centers, GramOptions::default())
    }

    pub fn build_with<K: Kernel + ?Sized>(
        kernel: &K,
        centers: &[Point],
        options: GramOptions,
    ) -> Result<Self> {
        if centers.is_empty() {
            return Err(StafError::NoCenters);
        }
        for c in centers {
            check_dim(kernel.dimension(), c.len())?;
        }
        let m = centers.len();
        let mut entries = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = kernel.eval_unchecked(&centers[i], &centers[j]);
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        let mut duplicate_pair = None;
        'outer: for i in 0..m {
            for j in (i + 1)..m {
                if (&centers[i] - &centers[j]).norm() < options.duplicate_tolerance {
                    duplicate_pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let mut gram = Self::with_entries(entries, options)?;
        gram.centers = centers.to_vec();
        gram.duplicate_pair = duplicate_pair;
        Ok(gram)
    }

    /// Wraps an explicit symmetric matrix, e.g. a synthetic Gram matrix in
    /// tests. The matrix is not tied to any centers.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        Self::with_entries(entries, GramOptions::default())
    }

    fn with_entries(entries: DMatrix<f64>, options: GramOptions) -> Result<Self> {
        if entries.nrows() == 0 {
            return Err(StafError::NoCenters);
        }
        check_dim(entries.nrows(), entries.ncols())?;
        let n = entries.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(StafError::InvalidParameter(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(StafError::InvalidParameter(
                "Gram matrix has non-finite entries".into(),
            ));
        }
        let eigenvalues = entries.clone().symmetric_eigenvalues();
        let largest_eigenvalue = eigenvalues.max();
        let smallest_eigenvalue = eigenvalues.min();
        Ok(Self {
            centers: Vec::new(),
            entries,
            largest_eigenvalue,
            smallest_eigenvalue,
            duplicate_pair: None,
            options,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.largest_eigenvalue
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.smallest_eigenvalue
    }

    pub fn options(&self) -> GramOptions {
        self.options
    }

    /// `A_c / a_c`; infinite when the matrix is not strictly positive definite.
    pub fn condition_number(&self) -> f64 {
        if self.smallest_eigenvalue <= 0.0 {
            f64::INFINITY
        } else {
            self.largest_eigenvalue / self.smallest_eigenvalue
        }
    }

    /// Indices of the first pair of centers closer than the duplicate tolerance.
    pub fn duplicate_centers(&self) -> Option<(usize, usize)> {
        self.duplicate_pair
    }

    pub fn is_positive_definite(&self) -> bool {
        self.smallest_eigenvalue > 0.0
    }

    /// Fails unless the matrix is strictly positive definite, free of
    /// duplicate centers and within the condition-number cap.
    pub fn check_conditioning(&self) -> Result<()> {
        let condition = self.condition_number();
        if self.duplicate_pair.is_some() || condition > self.options.condition_cap {
            return Err(StafError::IllConditioned {
                condition,
                cap: self.options.condition_cap,
            });
        }
        Ok(())
    }

    pub(crate) fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        self.check_conditioning()?;
        Cholesky::new(self.entries.clone()).ok_or(StafError::NotPositiveDefinite {
            min_eigenvalue: self.smallest_eigenvalue,
        })
    }

    /// `v^T K v`.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.entries * v))
    }
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

    #[test]
    fn single_center() {
        let c = p(&[0.3, -0.4]);
        let g = GramMatrix::build(&ExponentialKernel::new(2), std::slice::from_ref(&c)).unwrap();
        assert_eq!(g.size(), 1);
        assert_relative_eq!(g.entries()[(0, 0)], c.dot(&c).exp());
    }

    #[test]
    fn two_center_entries() {
        let g = GramMatrix::build(
            &ExponentialKernel::new(2),
            &[p(&[0.0, 0.0]), p(&[1.0, 0.0])],
        )
        .unwrap();
        let e = g.entries();
        assert_eq!(e[(0, 0)], 1.0);
        assert_eq!(e[(0, 1)], 1.0);
        assert_eq!(e[(1, 0)], 1.0);
        assert_relative_eq!(e[(1, 1)], std::f64::consts::E);
    }

    #[test]
    fn distinct_random_centers_are_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = ExponentialKernel::new(2);
        for _ in 0..100 {
            let centers: Vec<Point> = (0..3)
                .map(|_| p(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .collect();
            let g = GramMatrix::build(&k, &centers).unwrap();
            // independent check through the full eigen-decomposition
            let eig = g.entries().clone().symmetric_eigen();
            assert!(eig.eigenvalues.min() > 0.0);
            assert_relative_eq!(
                eig.eigenvalues.min(),
                g.smallest_eigenvalue(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn duplicate_centers_are_flagged_and_refused() {
        let c = p(&[0.5, 0.5]);
        let g = GramMatrix::build(&ExponentialKernel::new(2), &[c.clone(), c.clone()]).unwrap();
        assert_eq!(g.duplicate_centers(), Some((0, 1)));
        assert!(matches!(
            g.check_conditioning(),
            Err(StafError::IllConditioned { .. })
        ));
    }

    #[test]
    fn condition_cap_is_configurable() {
        let centers = [p(&[0.0]), p(&[0.5])];
        let k = ExponentialKernel::new(1);
        let g = GramMatrix::build(&k, &centers).unwrap();
        assert!(g.check_conditioning().is_ok());
        let strict = GramOptions {
            condition_cap: 1.5,
            ..GramOptions::default()
        };
        let g = GramMatrix::build_with(&k, &centers, strict).unwrap();
        assert!(g.check_conditioning().is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = ExponentialKernel::new(2);
        assert_eq!(
            GramMatrix::build(&k, &[]).unwrap_err(),
            StafError::NoCenters
        );
        assert!(matches!(
            GramMatrix::build(&k, &[p(&[1.0])]),
            Err(StafError::DimensionMismatch { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(GramMatrix::from_entries(asym).is_err());
    }
}
