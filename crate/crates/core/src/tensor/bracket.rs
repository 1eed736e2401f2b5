//! `[K,K]`, sectional K-curvature, constancy test and the Yukawa term.

use ndarray::{Array1, Array3, Array4, ArrayView1};
use serde::Serialize;

use super::cubic::{CubicTensor, KOperator};
use super::metric::Metric;
use crate::error::{Error, Result};
use crate::linalg;

/// `[K,K](X,Y)Z = K_X K_Y Z - K_Y K_X Z` in the coordinate basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketTensor {
    /// `mixed[[m, l, i, j]]`: component `m` of `[K,K](e_i, e_j) e_l`.
    mixed: Array4<f64>,
    /// `S_ijkl = g([K,K](e_i, e_j) e_l, e_k)`.
    lowered: Array4<f64>,
}

/// Residuals of the four algebraic symmetries of `S`, relative to `max|S|`
/// (or 1 when `S` is smaller than that).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketSymmetryResiduals {
    pub antisymmetric_first_pair: f64,
    pub first_bianchi: f64,
    pub antisymmetric_last_pair: f64,
    pub pair_exchange: f64,
}

impl BracketSymmetryResiduals {
    pub fn max(&self) -> f64 {
        self.antisymmetric_first_pair
            .max(self.first_bianchi)
            .max(self.antisymmetric_last_pair)
            .max(self.pair_exchange)
    }
}

impl BracketTensor {
    pub fn dim(&self) -> usize {
        self.mixed.dim().0
    }

    pub fn mixed(&self) -> &Array4<f64> {
        &self.mixed
    }

    pub fn lowered(&self) -> &Array4<f64> {
        &self.lowered
    }

    /// `[K,K](X,Y)Z` for arbitrary vectors.
    pub fn apply(&self, x: ArrayView1<f64>, y: ArrayView1<f64>, z: ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        Array1::from_shape_fn(n, |m| {
            let mut s = 0.0;
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        s += self.mixed[[m, l, i, j]] * x[i] * y[j] * z[l];
                    }
                }
            }
            s
        })
    }

    /// Largest component magnitude of the (1,3) array.
    pub fn max_norm(&self) -> f64 {
        linalg::max_abs(self.mixed.iter())
    }

    /// Largest g-norm of `[K,K](e_i, e_j) e_l` over basis triples.
    pub fn max_vector_norm(&self, g: &Metric) -> f64 {
        let n = self.dim();
        let mut best = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v = Array1::from_shape_fn(n, |m| self.mixed[[m, l, i, j]]);
                    best = best.max(g.norm(v.view()));
                }
            }
        }
        best
    }

    pub fn symmetry_residuals(&self) -> BracketSymmetryResiduals {
        let n = self.dim();
        let s = &self.lowered;
        let scale = linalg::max_abs(s.iter()).max(1.0);
        let mut r = [0.0_f64; 4];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        r[0] = r[0].max((s[[i, j, k, l]] + s[[j, i, k, l]]).abs());
                        r[2] = r[2].max((s[[i, j, k, l]] + s[[i, j, l, k]]).abs());
                        r[3] = r[3].max((s[[i, j, k, l]] - s[[l, k, j, i]]).abs());
                    }
                }
            }
        }
        // [K,K](X,Y)Z + [K,K](Y,Z)X + [K,K](Z,X)Y with X=e_i, Y=e_j, Z=e_l
        let m = &self.mixed;
        for c in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let v = m[[c, l, i, j]] + m[[c, i, j, l]] + m[[c, j, l, i]];
                        r[1] = r[1].max(v.abs());
                    }
                }
            }
        }
        BracketSymmetryResiduals {
            antisymmetric_first_pair: r[0] / scale,
            first_bianchi: r[1] / scale,
            antisymmetric_last_pair: r[2] / scale,
            pair_exchange: r[3] / scale,
        }
    }
}

pub fn bracket(k: &KOperator) -> BracketTensor {
    let n = k.dim();
    let kd = k.data();
    let mut mixed = Array4::<f64>::zeros((n, n, n, n));
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        s += kd[[m, i, p]] * kd[[p, j, l]] - kd[[m, j, p]] * kd[[p, i, l]];
                    }
                    mixed[[m, l, i, j]] = s;
                }
            }
        }
    }
    let g = k.metric().matrix();
    let lowered = Array4::from_shape_fn((n, n, n, n), |(i, j, kk, l)| {
        (0..n).map(|m| g[[kk, m]] * mixed[[m, l, i, j]]).sum()
    });
    BracketTensor { mixed, lowered }
}

/// Normalized Gram determinant below which a plane counts as degenerate.
pub const DEGENERATE_PLANE: f64 = 1e-12;

/// Sectional K-curvature `g([K,K](e1,e2)e2, e1)` of the plane spanned by `x, y`,
/// computed after g-orthonormalizing the pair.
pub fn sectional_k_curvature(k: &KOperator, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    let g = k.metric();
    let n = g.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x.len().min(y.len()) });
    }
    let xx = g.inner(x, x);
    let yy = g.inner(y, y);
    let xy = g.inner(x, y);
    let gram = if xx > 0.0 && yy > 0.0 { (xx * yy - xy * xy) / (xx * yy) } else { 0.0 };
    if !(gram > DEGENERATE_PLANE) {
        return Err(Error::DegeneratePlane { gram });
    }
    let e1 = x.to_owned() / xx.sqrt();
    let mut e2 = y.to_owned();
    e2.scaled_add(-g.inner(y, e1.view()), &e1);
    let e2n = g.norm(e2.view());
    let e2 = e2 / e2n;
    let k11 = k.apply(e1.view(), e1.view());
    let k22 = k.apply(e2.view(), e2.view());
    let k12 = k.apply(e1.view(), e2.view());
    Ok(g.inner(k22.view(), k11.view()) - g.inner(k12.view(), k12.view()))
}

/// Least-squares fit of `A` in
/// `g(K(X,W),K(Y,Z)) - g(K(Y,W),K(X,Z)) = A[g(X,W)g(Y,Z) - g(Y,W)g(X,Z)]`
/// over all quadruples of a g-orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantCurvatureFit {
    pub a: f64,
    /// Largest absolute residual of the fitted identity.
    pub residual: f64,
}

pub fn constant_curvature_fit(k: &KOperator) -> Result<ConstantCurvatureFit> {
    let (_, c) = k.orthonormal_cubic()?;
    let c = c.data();
    let n = c.dim().0;
    let lhs = |i: usize, j: usize, kk: usize, l: usize| -> f64 {
        (0..n).map(|m| c[[i, l, m]] * c[[j, kk, m]] - c[[j, l, m]] * c[[i, kk, m]]).sum()
    };
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut num = 0.0;
    let mut den = 0.0;
    let mut cache = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                for l in 0..n {
                    let v = lhs(i, j, kk, l);
                    let m = delta(i, l) * delta(j, kk) - delta(j, l) * delta(i, kk);
                    num += v * m;
                    den += m * m;
                    cache.push((v, m));
                }
            }
        }
    }
    let a = if den > 0.0 { num / den } else { 0.0 };
    let residual = cache.iter().fold(0.0_f64, |r, (v, m)| r.max((v - a * m).abs()));
    Ok(ConstantCurvatureFit { a, residual })
}

/// Returns the constant sectional K-curvature `A` when the fitted identity holds
/// to `tol`.
pub fn check_constant_curvature(k: &KOperator, tol: f64) -> Option<f64> {
    constant_curvature_fit(k).ok().filter(|fit| fit.residual <= tol).map(|fit| fit.a)
}

/// Yukawa term `Y = C_ijk C^ijk - C_i C^i` with `C_i = C_ijk g^jk`.
pub fn yukawa_term(c: &CubicTensor, g: &Metric) -> Result<f64> {
    let n = g.dim();
    if c.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: c.dim() });
    }
    let gi = g.inverse();
    let cd = c.data();
    let raise = |t: &Array3<f64>, slot: usize| -> Array3<f64> {
        Array3::from_shape_fn((n, n, n), |(a, b, d)| {
            let idx = [a, b, d];
            (0..n)
                .map(|p| {
                    let mut src = idx;
                    src[slot] = p;
                    gi[[idx[slot], p]] * t[[src[0], src[1], src[2]]]
                })
                .sum()
        })
    };
    let upper = raise(&raise(&raise(cd, 0), 1), 2);
    let full: f64 = cd.iter().zip(upper.iter()).map(|(a, b)| a * b).sum();
    let trace = Array1::from_shape_fn(n, |i| {
        let mut s = 0.0;
        for j in 0..n {
            for kk in 0..n {
                s += cd[[i, j, kk]] * gi[[j, kk]];
            }
        }
        s
    });
    let trace_up = gi.dot(&trace);
    Ok(full - trace.dot(&trace_up))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_cubic, random_spd};
    use crate::tensor::raise_index;
    use ndarray::{array, Array3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diagonal_k(lambda: &[f64]) -> KOperator {
        let n = lambda.len();
        let c = CubicTensor::from_sorted_fn(n, |i, j, k| if i == j && j == k { lambda[i] } else { 0.0 });
        raise_index(&c, &Metric::identity(n)).unwrap()
    }

    fn isothermal(phi: f64, f: [f64; 4]) -> (CubicTensor, Metric) {
        let c = CubicTensor::from_sorted_fn(2, |i, j, k| f[i + j + k]);
        let g = Metric::new(array![[phi, 0.0], [0.0, phi]]).unwrap();
        (c, g)
    }

    #[test]
    fn diagonal_k_has_zero_bracket() {
        let k = diagonal_k(&[2.0, -1.0, 0.5]);
        assert_eq!(bracket(&k).max_norm(), 0.0);
        let k1 = diagonal_k(&[3.7]);
        assert_eq!(bracket(&k1).max_norm(), 0.0);
    }

    #[test]
    fn violating_two_dim_example_has_nonzero_bracket() {
        let (c, g) = isothermal(1.0, [1.0, 0.0, 2.0, 0.0]);
        let k = raise_index(&c, &g).unwrap();
        let b = bracket(&k);
        // brute force: K_x = [[1,0],[0,2]], K_y = [[0,2],[2,0]]
        let kx = array![[1.0, 0.0], [0.0, 2.0]];
        let ky = array![[0.0, 2.0], [2.0, 0.0]];
        let comm = kx.dot(&ky) - ky.dot(&kx);
        for m in 0..2 {
            for l in 0..2 {
                assert!((b.mixed()[[m, l, 0, 1]] - comm[[m, l]]).abs() < 1e-14);
            }
        }
        assert!(b.max_norm() > 1.0);
    }

    #[test]
    fn bracket_symmetries_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..40 {
            let n = 2 + trial % 4;
            let g = random_spd(&mut rng, n);
            let k = raise_index(&random_cubic(&mut rng, n, 1.0), &g).unwrap();
            let r = bracket(&k).symmetry_residuals();
            assert!(r.max() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn sectional_curvature_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = random_spd(&mut rng, 3);
        let k = raise_index(&random_cubic(&mut rng, 3, 1.0), &g).unwrap();
        let x = array![1.0, 0.2, -0.4];
        let y = array![0.1, -0.7, 0.9];
        let base = sectional_k_curvature(&k, x.view(), y.view()).unwrap();
        for _ in 0..10 {
            let (a, b, c, d): (f64, f64, f64, f64) =
                (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            if (a * d - b * c).abs() < 0.1 {
                continue;
            }
            let u = &x * a + &y * b;
            let v = &x * c + &y * d;
            let kk = sectional_k_curvature(&k, u.view(), v.view()).unwrap();
            assert!((kk - base).abs() < 1e-10 * base.abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_plane_is_an_error() {
        let k = diagonal_k(&[1.0, 2.0]);
        let x = array![1.0, 1.0];
        let y = array![2.0, 2.0 + 1e-9];
        assert!(matches!(sectional_k_curvature(&k, x.view(), y.view()), Err(Error::DegeneratePlane { .. })));
    }

    #[test]
    fn diagonal_k_is_flat_in_every_plane() {
        let k = diagonal_k(&[2.0, 1.0, 4.0]);
        let x = array![0.3, 1.0, -0.2];
        let y = array![1.0, 0.0, 0.5];
        assert_eq!(check_constant_curvature(&k, 1e-12), Some(0.0));
        assert!(sectional_k_curvature(&k, x.view(), y.view()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn non_constant_two_dim_example() {
        let (c, g) = isothermal(1.0, [1.0, 0.0, 2.0, 0.0]);
        let k = raise_index(&c, &g).unwrap();
        // in dim 2 every K has constant sectional curvature (only one plane)
        assert!(check_constant_curvature(&k, 1e-10).is_some());
        // in dim 3 a block-diagonal embedding with a flat third axis is not constant
        let c3 = CubicTensor::from_sorted_fn(3, |i, j, k| {
            if k < 2 {
                c.data()[[i, j, k]]
            } else if i == 2 && j == 2 {
                1.0
            } else {
                0.0
            }
        });
        let k3 = raise_index(&c3, &Metric::identity(3)).unwrap();
        assert!(check_constant_curvature(&k3, 1e-6).is_none());
    }

    #[test]
    fn yukawa_examples() {
        let g = Metric::identity(1);
        let c = CubicTensor::new(Array3::from_elem((1, 1, 1), 1.7)).unwrap();
        assert!(yukawa_term(&c, &g).unwrap().abs() < 1e-15);

        let (c, g) = isothermal(1.0, [1.0, 1.0, 1.0, 0.0]);
        assert!((yukawa_term(&c, &g).unwrap() - 2.0).abs() < 1e-14);

        let c = CubicTensor::from_sorted_fn(3, |i, j, k| if i == j && j == k { [1.0, -2.0, 0.5][i] } else { 0.0 });
        assert!(yukawa_term(&c, &Metric::identity(3)).unwrap().abs() < 1e-14);
    }
}
