//! Thomas algorithm for tridiagonal systems.

use crate::scalar::Real;

/// Solve `A x = rhs` in place for tridiagonal `A` with sub-diagonal
/// `lower`, main diagonal `diag` and super-diagonal `upper`.
///
/// No pivoting: the callers build strictly diagonally dominant systems
/// (backward-Euler diffusion), for which forward elimination is stable.
pub struct TridiagonalSolver<T: Real> {
    // precomputed elimination coefficients for a fixed matrix
    upper_prime: Vec<T>,
    diag: Vec<T>,
    lower: Vec<T>,
}

impl<T: Real> TridiagonalSolver<T> {
    pub fn new(lower: Vec<T>, diag: Vec<T>, upper: Vec<T>) -> Self {
        let n = diag.len();
        assert!(n >= 2, "system too small");
        assert_eq!(lower.len(), n - 1);
        assert_eq!(upper.len(), n - 1);
        // forward sweep on the matrix only; reused across right-hand sides
        let mut upper_prime = vec![T::zero(); n - 1];
        let mut diag_prime = vec![T::zero(); n];
        diag_prime[0] = diag[0];
        upper_prime[0] = upper[0] / diag[0];
        for i in 1..n {
            diag_prime[i] = diag[i] - lower[i - 1] * upper_prime[i - 1];
            if i < n - 1 {
                upper_prime[i] = upper[i] / diag_prime[i];
            }
        }
        Self { upper_prime, diag: diag_prime, lower }
    }

    pub fn solve(&self, rhs: &[T], x: &mut Vec<T>) {
        let n = self.diag.len();
        assert_eq!(rhs.len(), n);
        x.clear();
        x.resize(n, T::zero());
        x[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            x[i] = (rhs[i] - self.lower[i - 1] * x[i - 1]) / self.diag[i];
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= self.upper_prime[i] * next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_elimination() {
        // 5x5 diagonally dominant system solved by full Gaussian
        // elimination as the oracle
        let lower = vec![-1.0, -0.5, -2.0, -1.0];
        let diag = vec![4.0, 5.0, 6.0, 7.0, 4.0];
        let upper = vec![-0.7, -1.5, -0.3, -2.0];
        let rhs = vec![1.0, -2.0, 3.0, 0.5, -1.0];

        let n = diag.len();
        let mut a = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            a[i][i] = diag[i];
            if i > 0 {
                a[i][i - 1] = lower[i - 1];
            }
            if i < n - 1 {
                a[i][i + 1] = upper[i];
            }
        }
        let mut b = rhs.clone();
        for k in 0..n {
            for i in k + 1..n {
                let factor = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= factor * a[k][j];
                }
                b[i] -= factor * b[k];
            }
        }
        let mut expect = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= a[i][j] * expect[j];
            }
            expect[i] = s / a[i][i];
        }

        let solver = TridiagonalSolver::new(lower, diag, upper);
        let mut x = Vec::new();
        solver.solve(&rhs, &mut x);
        for (xi, ei) in x.iter().zip(&expect) {
            assert!((xi - ei).abs() < 1e-12, "{x:?} vs {expect:?}");
        }
    }

    #[test]
    fn reusable_across_rhs() {
        let solver =
            TridiagonalSolver::<f64>::new(vec![-1.0; 9], vec![3.0; 10], vec![-1.0; 9]);
        let mut x = Vec::new();
        for scale in [1.0, 2.0, -3.0] {
            let rhs = vec![scale; 10];
            solver.solve(&rhs, &mut x);
            // residual check
            for i in 0..10 {
                let mut r = 3.0 * x[i] - rhs[i];
                if i > 0 {
                    r -= x[i - 1];
                }
                if i < 9 {
                    r -= x[i + 1];
                }
                assert!(r.abs() < 1e-12);
            }
        }
    }
}
