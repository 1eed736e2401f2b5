//! The BC_n trilogarithm prepotential
//! `F = r Σ f(x_i) + s Σ f(2x_i) + q Σ_{i<j} (f(x_i + x_j) + f(x_i - x_j))`
//! with `f''' = coth`.

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bcn_kernel, coth};

/// Default distance from a coth pole below which a point is rejected.
pub const DEFAULT_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcnParams {
    pub n: usize,
    pub s: f64,
    pub q: f64,
    pub r: f64,
}

impl BcnParams {
    /// Parameters on the WDVV constraint `r = -8s - 2q(n - 2)`.
    pub fn new(n: usize, s: f64, q: f64) -> Result<Self> {
        Self::with_r(n, s, q, Self::constrained_r(n, s, q))
    }

    /// Parameters with an explicit `r`, possibly off the constraint.
    pub fn with_r(n: usize, s: f64, q: f64, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("BC_n needs n >= 1".into()));
        }
        if !(s.is_finite() && q.is_finite() && r.is_finite()) {
            return Err(Error::Invalid("BC_n parameters must be finite".into()));
        }
        Ok(BcnParams { n, s, q, r })
    }

    pub fn constrained_r(n: usize, s: f64, q: f64) -> f64 {
        -8.0 * s - 2.0 * q * (n as f64 - 2.0)
    }

    pub fn on_constraint(&self) -> bool {
        self.r == Self::constrained_r(self.n, self.s, self.q)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: x.len() });
        }
        Ok(())
    }

    /// Arguments of every coth appearing in the third derivatives, with names.
    /// Terms whose coefficient is zero are skipped.
    fn coth_arguments(&self, x: &[f64]) -> Vec<(String, f64)> {
        let mut args = Vec::new();
        for i in 0..self.n {
            if self.r != 0.0 {
                args.push((format!("x{}", i + 1), x[i]));
            }
            if self.s != 0.0 {
                args.push((format!("2*x{}", i + 1), 2.0 * x[i]));
            }
        }
        if self.q != 0.0 {
            for i in 0..self.n {
                for j in (i + 1)..self.n {
                    args.push((format!("x{}+x{}", i + 1, j + 1), x[i] + x[j]));
                    args.push((format!("x{}-x{}", i + 1, j + 1), x[i] - x[j]));
                }
            }
        }
        args
    }

    /// Rejects points where some coth argument lies within `margin` of zero.
    pub fn check_generic(&self, x: &[f64], margin: f64) -> Result<()> {
        self.check_dim(x)?;
        for (name, z) in self.coth_arguments(x) {
            if !(z.abs() >= margin) {
                return Err(Error::SingularPoint { point: x.to_vec(), argument: name, margin });
            }
        }
        Ok(())
    }

    /// Closed-form `F_ijk`.
    pub fn third_derivatives(&self, x: &[f64]) -> Result<Array3<f64>> {
        self.check_dim(x)?;
        let n = self.n;
        let ct = |name: String, z: f64| {
            coth(z).ok_or(Error::Domain { expr: format!("coth({name})"), reason: "coth pole at 0".into() })
        };
        let mut t = Array3::<f64>::zeros((n, n, n));
        for i in 0..n {
            let mut diag = 0.0;
            if self.r != 0.0 {
                diag += self.r * ct(format!("x{}", i + 1), x[i])?;
            }
            if self.s != 0.0 {
                diag += 8.0 * self.s * ct(format!("2*x{}", i + 1), 2.0 * x[i])?;
            }
            t[[i, i, i]] = diag;
        }
        if self.q != 0.0 {
            for i in 0..n {
                for j in (i + 1)..n {
                    let plus = ct(format!("x{}+x{}", i + 1, j + 1), x[i] + x[j])?;
                    let minus = ct(format!("x{}-x{}", i + 1, j + 1), x[i] - x[j])?;
                    t[[i, i, i]] += self.q * (plus + minus);
                    // coth(x_j - x_i) = -coth(x_i - x_j)
                    t[[j, j, j]] += self.q * (plus - minus);
                    let iij = self.q * (plus - minus);
                    let jji = self.q * (plus + minus);
                    for (a, b, c) in [(i, i, j), (i, j, i), (j, i, i)] {
                        t[[a, b, c]] = iij;
                    }
                    for (a, b, c) in [(j, j, i), (j, i, j), (i, j, j)] {
                        t[[a, b, c]] = jji;
                    }
                }
            }
        }
        Ok(t)
    }

    /// Unit coefficients `A_k = sinh(2 x_k)`.
    pub fn unit_coefficients(&self, x: &[f64]) -> Array1<f64> {
        x.iter().map(|v| (2.0 * v).sinh()).collect()
    }

    /// `h(x) = r + 2q Σ cosh(2 x_k)`.
    pub fn h(&self, x: &[f64]) -> f64 {
        self.r + 2.0 * self.q * x.iter().map(|v| (2.0 * v).cosh()).sum::<f64>()
    }

    /// `B_ij = Σ_k A_k F_ijk` from the closed forms.
    pub fn b_matrix(&self, x: &[f64]) -> Result<Array2<f64>> {
        let t = self.third_derivatives(x)?;
        let a = self.unit_coefficients(x);
        let n = self.n;
        Ok(Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|k| a[k] * t[[i, j, k]]).sum()))
    }

    /// The prepotential itself through the trilogarithm series. Only valid
    /// where every argument of `f` is positive: `x_1 > x_2 > ... > x_n > 0`
    /// when `q != 0`.
    pub fn prepotential_series(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let mut total = 0.0;
        for i in 0..self.n {
            if self.r != 0.0 {
                total += self.r * bcn_kernel(x[i])?;
            }
            if self.s != 0.0 {
                total += self.s * bcn_kernel(2.0 * x[i])?;
            }
            if self.q != 0.0 {
                for j in (i + 1)..self.n {
                    total += self.q * (bcn_kernel(x[i] + x[j])? + bcn_kernel(x[i] - x[j])?);
                }
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint() {
        assert_eq!(BcnParams::new(2, 0.25, 1.0).unwrap().r, -2.0);
        assert_eq!(BcnParams::new(3, 0.5, -1.0).unwrap().r, -2.0);
        assert_eq!(BcnParams::new(2, 0.0, 1.0).unwrap().r, 0.0);
        assert!(!BcnParams::with_r(3, 0.5, 1.0, -6.0 + 0.1).unwrap().on_constraint());
    }

    #[test]
    fn third_derivatives_are_symmetric_and_sparse() {
        let p = BcnParams::new(3, 0.3, 0.7).unwrap();
        let t = p.third_derivatives(&[0.9, 0.4, -0.25]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(t[[i, j, k]], t[[j, i, k]]);
                    assert_eq!(t[[i, j, k]], t[[i, k, j]]);
                    if i != j && j != k && i != k {
                        assert_eq!(t[[i, j, k]], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn b_is_proportional_to_identity() {
        let p = BcnParams::new(2, 0.25, 1.0).unwrap();
        let x = [0.37, -0.81];
        let b = p.b_matrix(&x).unwrap();
        let h = p.h(&x);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { h } else { 0.0 };
                assert!((b[[i, j]] - expect).abs() < 1e-8 * h.abs().max(1.0));
            }
        }
    }

    #[test]
    fn singular_points_are_named() {
        let p = BcnParams::new(2, 0.0, 1.0).unwrap();
        match p.check_generic(&[0.5, 0.5], DEFAULT_MARGIN) {
            Err(Error::SingularPoint { argument, .. }) => assert_eq!(argument, "x1-x2"),
            other => panic!("{other:?}"),
        }
        assert!(p.check_generic(&[0.3, 0.7], DEFAULT_MARGIN).is_ok());
        assert!(matches!(p.third_derivatives(&[0.5, 0.5]), Err(Error::Domain { .. })));
    }
}
