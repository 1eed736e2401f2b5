//! Small dense linear algebra on `ndarray` matrices.
//!
//! Everything here targets the tiny (n <= 32) matrices that appear at a single
//! chart point, so the routines favour clarity over blocking or SIMD.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
///
/// A pivot is rejected when it falls below `1e-12 * max(diag A)`.
pub fn cholesky(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: a.ncols() });
    }
    let max_diag = (0..n).map(|i| a[[i, i]].abs()).fold(0.0_f64, f64::max);
    let threshold = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > threshold) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_triangular_inverse(l: ArrayView2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        inv[[j, j]] = 1.0 / l[[j, j]];
        for i in (j + 1)..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[[i, k]] * inv[[k, j]];
            }
            inv[[i, j]] = s / l[[i, i]];
        }
    }
    inv
}

/// Inverse of an SPD matrix from its Cholesky factor, symmetrized.
pub fn spd_inverse_from_cholesky(l: ArrayView2<f64>) -> Array2<f64> {
    let linv = lower_triangular_inverse(l);
    let inv = linv.t().dot(&linv);
    symmetrize(inv.view())
}

pub fn symmetrize(a: ArrayView2<f64>) -> Array2<f64> {
    let n = a.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (a[[i, j]] + a[[j, i]]))
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: Array2<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: ArrayView2<f64>) -> Self {
        let n = a.nrows();
        let mut lu = a.to_owned();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[[x, k]].abs().total_cmp(&lu[[y, k]].abs()))
                .unwrap_or(k);
            if p != k {
                for c in 0..n {
                    lu.swap([k, c], [p, c]);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[[k, k]];
            if pivot == 0.0 {
                continue;
            }
            for i in (k + 1)..n {
                let f = lu[[i, k]] / pivot;
                lu[[i, k]] = f;
                for c in (k + 1)..n {
                    lu[[i, c]] -= f * lu[[k, c]];
                }
            }
        }
        Lu { lu, perm, sign }
    }

    pub fn determinant(&self) -> f64 {
        let n = self.lu.nrows();
        (0..n).fold(self.sign, |acc, i| acc * self.lu[[i, i]])
    }

    pub fn solve(&self, b: ArrayView1<f64>) -> Array1<f64> {
        let n = self.lu.nrows();
        let mut x: Array1<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[[i, k]] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.lu[[i, k]] * x[k];
            }
            x[i] /= self.lu[[i, i]];
        }
        x
    }

    pub fn inverse(&self) -> Array2<f64> {
        let n = self.lu.nrows();
        let mut inv = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut e = Array1::<f64>::zeros(n);
            e[j] = 1.0;
            inv.column_mut(j).assign(&self.solve(e.view()));
        }
        inv
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and the orthogonal matrix whose columns are
/// the corresponding eigenvectors.
pub fn jacobi_eigen(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = symmetrize(a);
    let mut v = Array2::<f64>::eye(n);
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 2 || scale == 0.0 {
        return (m.diag().to_owned(), v);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    (m.diag().to_owned(), v)
}

pub fn max_abs<'a, I: IntoIterator<Item = &'a f64>>(values: I) -> f64 {
    values.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn frobenius<'a, I: IntoIterator<Item = &'a f64>>(values: I) -> f64 {
    values.into_iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Orthonormal basis (columns) of the orthogonal complement of the columns of `q`
/// in R^n, `q` assumed orthonormal.
pub fn orthogonal_complement(q: ArrayView2<f64>) -> Array2<f64> {
    let n = q.nrows();
    let mut basis: Vec<Array1<f64>> = q.columns().into_iter().map(|c| c.to_owned()).collect();
    let start = basis.len();
    for e in 0..n {
        let mut v = Array1::<f64>::zeros(n);
        v[e] = 1.0;
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let d = v.dot(b);
                v.scaled_add(-d, b);
            }
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
        if basis.len() == n {
            break;
        }
    }
    let m = basis.len() - start;
    let mut out = Array2::<f64>::zeros((n, m));
    for (c, b) in basis[start..].iter().enumerate() {
        out.column_mut(c).assign(b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_roundtrip() {
        let a = array![[4.0, 2.0, 0.4], [2.0, 3.0, 0.5], [0.4, 0.5, 2.0]];
        let l = cholesky(a.view()).unwrap();
        let back = l.dot(&l.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-14);
        }
        let inv = spd_inverse_from_cholesky(l.view());
        let id = inv.dot(&a);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(cholesky(a.view()), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn lu_inverse_and_det() {
        let a = array![[0.0, 2.0, 1.0], [1.0, -1.0, 0.0], [3.0, 0.5, -2.0]];
        let lu = Lu::new(a.view());
        // det by cofactor expansion
        let det = 0.0 * (2.0 - 0.0) - 2.0 * (-2.0 - 0.0) + 1.0 * (0.5 + 3.0);
        assert!((lu.determinant() - det).abs() < 1e-13);
        let id = lu.inverse().dot(&a);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = array![[2.0, -1.0, 0.3], [-1.0, 2.0, 0.7], [0.3, 0.7, -1.0]];
        let (w, v) = jacobi_eigen(a.view());
        let back = v.dot(&Array2::from_diag(&w)).dot(&v.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-13);
        }
        let id = v.t().dot(&v);
        for i in 0..3 {
            assert!((id[[i, i]] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn complement_is_orthonormal() {
        let mut q = Array2::<f64>::zeros((3, 1));
        q[[0, 0]] = 0.6;
        q[[1, 0]] = 0.8;
        let c = orthogonal_complement(q.view());
        assert_eq!(c.ncols(), 2);
        let full = ndarray::concatenate![ndarray::Axis(1), q, c];
        let id = full.t().dot(&full);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - e).abs() < 1e-14);
            }
        }
    }
}
