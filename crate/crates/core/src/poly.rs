//! Real polynomials in the monomial basis, lowest degree first.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self(coefficients)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    /// Degree after dropping trailing zeros; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self(self.0.iter().enumerate().skip(1).map(|(j, &c)| j as f64 * c).collect())
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut out = vec![0.0];
        out.extend(self.0.iter().enumerate().map(|(j, &c)| c / (j + 1) as f64));
        Self(out)
    }

    /// `self - value`.
    pub fn shifted(&self, value: f64) -> Self {
        let mut c = self.0.clone();
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] -= value;
        Self(c)
    }

    /// Distinct real roots in increasing order.
    ///
    /// Companion-matrix eigenvalues, filtered to the real axis and polished by Newton
    /// steps on the original coefficients. The zero polynomial has no isolated roots.
    pub fn real_roots(&self) -> Vec<f64> {
        let Some(deg) = self.degree() else { return Vec::new() };
        let c = &self.0[..=deg];
        let lead = c[deg];
        let candidates: Vec<f64> = match deg {
            0 => Vec::new(),
            1 => vec![-c[0] / c[1]],
            _ => {
                let mut m = DMatrix::<f64>::zeros(deg, deg);
                for i in 1..deg {
                    m[(i, i - 1)] = 1.0;
                }
                for i in 0..deg {
                    m[(i, deg - 1)] = -c[i] / lead;
                }
                m.complex_eigenvalues()
                    .iter()
                    .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
                    .map(|z| z.re)
                    .collect()
            }
        };
        let d = self.derivative();
        let mut roots: Vec<f64> = candidates
            .into_iter()
            .map(|mut x| {
                for _ in 0..8 {
                    let dp = d.eval(x);
                    if dp == 0.0 {
                        break;
                    }
                    let px = self.eval(x);
                    let step = px / dp;
                    // Near multiple roots the residual is rounding noise; only accept
                    // steps that actually reduce it.
                    if !step.is_finite() || self.eval(x - step).abs() >= px.abs() {
                        break;
                    }
                    x -= step;
                    if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                        break;
                    }
                }
                x
            })
            .collect();
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * (1.0 + b.abs()));
        roots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots() {
        let p = Polynomial::new(vec![0.0, 1.0, 0.0, -1.0]);
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn no_real_roots() {
        assert!(Polynomial::new(vec![1.0, 0.0, 1.0]).real_roots().is_empty());
        assert!(Polynomial::new(vec![0.0]).real_roots().is_empty());
        assert!(Polynomial::new(vec![2.0]).real_roots().is_empty());
    }

    #[test]
    fn calculus() {
        let p = Polynomial::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.derivative().0, vec![2.0, 6.0]);
        let a = p.antiderivative();
        assert_eq!(a.eval(0.0), 0.0);
        assert!((a.eval(1.0) - 3.0).abs() < 1e-15);
        assert_eq!(Polynomial::new(vec![0.0, 0.0]).degree(), None);
    }

    #[test]
    fn double_root_is_reported_once() {
        let p = Polynomial::new(vec![1.0, -2.0, 1.0]);
        let r = p.real_roots();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-6);
    }
}
