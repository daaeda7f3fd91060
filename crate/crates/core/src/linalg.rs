//! Small linear-algebra kernels.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Sub};

/// Solves a tridiagonal system in place by the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (`lower[0]` unused), `upper[i]` multiplies
/// `x[i+1]` (last entry unused). Returns `None` on a zero pivot.
pub fn solve_tridiagonal<T>(lower: &[T], diag: &[T], upper: &[T], rhs: &mut [T]) -> Option<()>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T> + PartialEq + Default,
{
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Some(());
    }
    let zero = T::default();
    let mut c = vec![zero; n];
    let mut beta = diag[0];
    if beta == zero {
        return None;
    }
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == zero {
            return None;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c[i] * rhs[i + 1];
    }
    Some(())
}

/// Reusable complex tridiagonal solver with fixed coefficients.
#[derive(Debug, Clone)]
pub(crate) struct TridiagonalFactor {
    lower: Vec<Complex64>,
    c: Vec<Complex64>,
    inv_beta: Vec<Complex64>,
}

impl TridiagonalFactor {
    pub fn new(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Option<Self> {
        let n = diag.len();
        let mut c = vec![Complex64::default(); n];
        let mut inv_beta = vec![Complex64::default(); n];
        let mut beta = diag[0];
        for i in 0..n {
            if i > 0 {
                c[i - 1] = upper[i - 1] * inv_beta[i - 1];
                beta = diag[i] - lower[i] * c[i - 1];
            }
            if beta.norm() == 0.0 {
                return None;
            }
            inv_beta[i] = 1.0 / beta;
        }
        Some(Self { lower: lower.to_vec(), c, inv_beta })
    }

    pub fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_beta[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_beta[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.c[i] * next;
        }
    }
}

/// Eigenpairs of a real symmetric tridiagonal matrix, ascending.
///
/// Eigenvectors are normalized to unit Euclidean length.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<f64>)> =
        (0..n).map(|j| (eig.eigenvalues[j], eig.eigenvectors.column(j).iter().copied().collect())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense() {
        let lower = [0.0, 1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [1.0, 0.5, 1.5, 0.0];
        let x: [f64; 4] = [1.0, -2.0, 0.25, 3.0];
        let mut b = [0.0; 4];
        for i in 0..4 {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += lower[i] * x[i - 1];
            }
            if i < 3 {
                b[i] += upper[i] * x[i + 1];
            }
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut b).unwrap();
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn factor_matches_direct() {
        let n = 7;
        let lower: Vec<Complex64> = (0..n).map(|i| Complex64::new(0.1 * i as f64, -0.3)).collect();
        let diag: Vec<Complex64> = (0..n).map(|i| Complex64::new(2.0 + i as f64, 0.7)).collect();
        let upper: Vec<Complex64> = (0..n).map(|i| Complex64::new(-0.4, 0.05 * i as f64)).collect();
        let rhs: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut a = rhs.clone();
        solve_tridiagonal(&lower, &diag, &upper, &mut a).unwrap();
        let mut b = rhs;
        TridiagonalFactor::new(&lower, &diag, &upper).unwrap().solve(&mut b);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 20;
        let pairs = symmetric_tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]);
        for (j, (lambda, v)) in pairs.iter().enumerate() {
            let theta = (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            assert!((lambda - (2.0 - 2.0 * theta.cos())).abs() < 1e-12);
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
