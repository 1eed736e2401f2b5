use ndarray::{Array1, Array2, Array3, ArrayView1};

use super::metric::{Metric, SYMMETRY_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg;

/// The six index permutations of a rank-3 tensor.
pub(crate) const PERMUTATIONS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// All index orderings of a triple (with repeats when indices coincide).
pub(crate) fn permutations_of(idx: [usize; 3]) -> [[usize; 3]; 6] {
    PERMUTATIONS.map(|p| [idx[p[0]], idx[p[1]], idx[p[2]]])
}

/// Totally symmetric (0,3)-tensor `C_ijk = g(K(e_i, e_j), e_k)`.
///
/// The Amari-Chentsov tensor is the derived quantity `T = -2C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicTensor {
    data: Array3<f64>,
    asymmetry: f64,
}

impl CubicTensor {
    pub fn zeros(dim: usize) -> Self {
        CubicTensor { data: Array3::zeros((dim, dim, dim)), asymmetry: 0.0 }
    }

    /// Symmetrizes over all six permutations; rejects inputs whose relative
    /// asymmetry exceeds `1e-12`.
    pub fn new(data: Array3<f64>) -> Result<Self> {
        let (a, b, c) = data.dim();
        if a != b || b != c {
            return Err(Error::DimensionMismatch { expected: a, actual: if a != b { b } else { c } });
        }
        let n = a;
        let scale = linalg::max_abs(data.iter()).max(f64::MIN_POSITIVE);
        let mut asym = 0.0_f64;
        let mut sym = Array3::<f64>::zeros((n, n, n));
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let idx = [i, j, k];
                    let vals: Vec<f64> =
                        PERMUTATIONS.iter().map(|p| data[[idx[p[0]], idx[p[1]], idx[p[2]]]]).collect();
                    let mean = if vals.iter().all(|v| *v == vals[0]) {
                        vals[0]
                    } else {
                        vals.iter().sum::<f64>() / 6.0
                    };
                    for v in &vals {
                        asym = asym.max((v - mean).abs());
                    }
                    fill_symmetric(&mut sym, i, j, k, mean);
                }
            }
        }
        let asymmetry = asym / scale;
        if asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric { what: "cubic tensor", asymmetry });
        }
        Ok(CubicTensor { data: sym, asymmetry })
    }

    /// Builds from a function evaluated on sorted indices `i <= j <= k` only.
    pub fn from_sorted_fn<F: FnMut(usize, usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut data = Array3::<f64>::zeros((dim, dim, dim));
        for i in 0..dim {
            for j in i..dim {
                for k in j..dim {
                    fill_symmetric(&mut data, i, j, k, f(i, j, k));
                }
            }
        }
        CubicTensor { data, asymmetry: 0.0 }
    }

    pub fn try_from_sorted_fn<F>(dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> Result<f64>,
    {
        let mut data = Array3::<f64>::zeros((dim, dim, dim));
        for i in 0..dim {
            for j in i..dim {
                for k in j..dim {
                    fill_symmetric(&mut data, i, j, k, f(i, j, k)?);
                }
            }
        }
        Ok(CubicTensor { data, asymmetry: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.data.dim().0
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CubicTensor { data: &self.data * factor, asymmetry: self.asymmetry }
    }

    /// Amari-Chentsov tensor `T = -2C`.
    pub fn amari_chentsov(&self) -> Array3<f64> {
        &self.data * -2.0
    }

    /// `C = -T/2` from an Amari-Chentsov tensor.
    pub fn from_amari_chentsov(t: Array3<f64>) -> Result<Self> {
        Self::new(t * -0.5)
    }

    pub fn contract(&self, x: ArrayView1<f64>, y: ArrayView1<f64>, z: ArrayView1<f64>) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += self.data[[i, j, k]] * x[i] * y[j] * z[k];
                }
            }
        }
        s
    }

    /// Components in a new basis whose vectors are the columns of `frame`.
    pub fn in_frame(&self, frame: &Array2<f64>) -> CubicTensor {
        let n = self.dim();
        let m = frame.ncols();
        // contract one slot at a time
        let mut a = Array3::<f64>::zeros((m, n, n));
        for p in 0..m {
            for j in 0..n {
                for k in 0..n {
                    a[[p, j, k]] = (0..n).map(|i| frame[[i, p]] * self.data[[i, j, k]]).sum();
                }
            }
        }
        let mut b = Array3::<f64>::zeros((m, m, n));
        for p in 0..m {
            for q in 0..m {
                for k in 0..n {
                    b[[p, q, k]] = (0..n).map(|j| frame[[j, q]] * a[[p, j, k]]).sum();
                }
            }
        }
        CubicTensor::from_sorted_fn(m, |p, q, r| (0..n).map(|k| frame[[k, r]] * b[[p, q, k]]).sum())
    }
}

pub(crate) fn fill_symmetric(a: &mut Array3<f64>, i: usize, j: usize, k: usize, v: f64) {
    let idx = [i, j, k];
    for p in PERMUTATIONS {
        a[[idx[p[0]], idx[p[1]], idx[p[2]]]] = v;
    }
}

/// The (1,2)-tensor `K^h_ij`, stored with the metric used to raise it.
#[derive(Debug, Clone, PartialEq)]
pub struct KOperator {
    data: Array3<f64>,
    metric: Metric,
}

impl KOperator {
    /// Validates lower-index symmetry and g-self-adjointness to `1e-12` relative.
    pub fn new(data: Array3<f64>, metric: Metric) -> Result<Self> {
        let n = metric.dim();
        if data.dim() != (n, n, n) {
            return Err(Error::DimensionMismatch { expected: n, actual: data.dim().0 });
        }
        let scale = linalg::max_abs(data.iter()).max(f64::MIN_POSITIVE);
        let mut asym = 0.0_f64;
        for h in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    asym = asym.max((data[[h, i, j]] - data[[h, j, i]]).abs());
                }
            }
        }
        if asym / scale > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric { what: "K (lower indices)", asymmetry: asym / scale });
        }
        let k = KOperator { data, metric };
        let lowered = k.lowered_array();
        let lscale = linalg::max_abs(lowered.iter()).max(f64::MIN_POSITIVE);
        let mut adj = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    adj = adj.max((lowered[[i, j, l]] - lowered[[i, l, j]]).abs());
                }
            }
        }
        if adj / lscale > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric { what: "K (self-adjointness)", asymmetry: adj / lscale });
        }
        let mut data = k.data;
        for h in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = 0.5 * (data[[h, i, j]] + data[[h, j, i]]);
                    data[[h, i, j]] = v;
                    data[[h, j, i]] = v;
                }
            }
        }
        Ok(KOperator { data, metric: k.metric })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    fn lowered_array(&self) -> Array3<f64> {
        let n = self.dim();
        let g = self.metric.matrix();
        Array3::from_shape_fn((n, n, n), |(i, j, k)| (0..n).map(|h| g[[k, h]] * self.data[[h, i, j]]).sum())
    }

    /// `C_ijk = g_kh K^h_ij`, symmetrized with audit.
    pub fn lower_index(&self) -> Result<CubicTensor> {
        CubicTensor::new(self.lowered_array())
    }

    /// `K(X, Y)`, exactly commutative in its arguments.
    pub fn apply(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let mut out = Array1::<f64>::zeros(n);
        for h in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += self.data[[h, i, i]] * (x[i] * y[i]);
                for j in (i + 1)..n {
                    s += self.data[[h, i, j]] * (x[i] * y[j] + x[j] * y[i]);
                }
            }
            out[h] = s;
        }
        out
    }

    /// Matrix of the endomorphism `K_X`: `(K_X)^h_j = K^h_ij X^i`.
    pub fn operator(&self, x: ArrayView1<f64>) -> Array2<f64> {
        let n = self.dim();
        Array2::from_shape_fn((n, n), |(h, j)| (0..n).map(|i| self.data[[h, i, j]] * x[i]).sum())
    }

    /// Coordinate basis operator `K_{e_i}`.
    pub fn basis_operator(&self, i: usize) -> Array2<f64> {
        let n = self.dim();
        Array2::from_shape_fn((n, n), |(h, j)| self.data[[h, i, j]])
    }

    /// Same K expressed with a scalar factor, `αK`.
    pub fn scaled(&self, factor: f64) -> Self {
        KOperator { data: &self.data * factor, metric: self.metric.clone() }
    }

    /// The cubic form in the g-orthonormal frame of the metric, with the frame.
    pub fn orthonormal_cubic(&self) -> Result<(Array2<f64>, CubicTensor)> {
        let frame = self.metric.orthonormal_frame();
        Ok((frame.clone(), self.lower_index()?.in_frame(&frame)))
    }

    /// Trace field `E^h = g^{ij} K^h_ij`.
    pub fn trace(&self) -> Array1<f64> {
        let n = self.dim();
        let gi = self.metric.inverse();
        Array1::from_shape_fn(n, |h| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += gi[[i, j]] * self.data[[h, i, j]];
                }
            }
            s
        })
    }
}

/// `K^h_ij = g^{hk} C_ijk`.
pub fn raise_index(c: &CubicTensor, g: &Metric) -> Result<KOperator> {
    let n = g.dim();
    if c.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: c.dim() });
    }
    let gi = g.inverse();
    let cd = c.data();
    let mut data = Array3::<f64>::zeros((n, n, n));
    for h in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| gi[[h, k]] * cd[[i, j, k]]).sum();
                data[[h, i, j]] = v;
                data[[h, j, i]] = v;
            }
        }
    }
    Ok(KOperator { data, metric: g.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_cubic, random_spd};
    use ndarray::{array, Array3};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn raise_scalar() {
        let g = Metric::new(array![[2.0]]).unwrap();
        let c = CubicTensor::new(Array3::from_elem((1, 1, 1), 4.0)).unwrap();
        let k = raise_index(&c, &g).unwrap();
        assert_eq!(k.data()[[0, 0, 0]], 2.0);
    }

    #[test]
    fn raise_with_identity_metric_is_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_cubic(&mut rng, 3, 1.0);
        let k = raise_index(&c, &Metric::identity(3)).unwrap();
        for h in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(k.data()[[h, i, j]], c.data()[[i, j, h]]);
                }
            }
        }
    }

    #[test]
    fn self_adjoint_and_lowering_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = random_spd(&mut rng, 3);
            let c = random_cubic(&mut rng, 3, 1.0);
            let k = raise_index(&c, &g).unwrap();
            let scale = linalg::max_abs(c.data().iter());
            // g(K_{e_i} e_j, e_l) = g(e_j, K_{e_i} e_l) over all basis triples
            let gm = g.matrix();
            for i in 0..3 {
                let ki = k.basis_operator(i);
                let lhs = gm.dot(&ki);
                let rhs = ki.t().dot(gm);
                for (a, b) in lhs.iter().zip(rhs.iter()) {
                    assert!((a - b).abs() <= 1e-12 * scale.max(1.0));
                }
            }
            let back = k.lower_index().unwrap();
            for (a, b) in back.data().iter().zip(c.data().iter()) {
                assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let c = CubicTensor::zeros(2);
        assert!(matches!(
            raise_index(&c, &Metric::identity(3)),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn non_spd_metric_is_rejected() {
        assert!(matches!(
            Metric::new(array![[1.0, 0.0], [0.0, -1.0]]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn asymmetric_cubic_is_rejected_small_noise_is_absorbed() {
        let mut t = Array3::<f64>::zeros((2, 2, 2));
        t[[0, 0, 1]] = 1.0;
        t[[0, 1, 0]] = 1.0;
        t[[1, 0, 0]] = 1.0 + 1e-14;
        let c = CubicTensor::new(t.clone()).unwrap();
        assert!(c.asymmetry() > 0.0 && c.asymmetry() < 1e-12);
        t[[1, 0, 0]] = 1.1;
        assert!(matches!(CubicTensor::new(t), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn product_is_exactly_commutative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_spd(&mut rng, 4);
        let k = raise_index(&random_cubic(&mut rng, 4, 2.0), &g).unwrap();
        let x = array![0.3, -1.7, 2.2, 0.01];
        let y = array![-0.9, 0.4, 1.3, 5.0];
        assert_eq!(k.apply(x.view(), y.view()), k.apply(y.view(), x.view()));
    }

    #[test]
    fn frame_change_preserves_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_spd(&mut rng, 3);
        let c = random_cubic(&mut rng, 3, 1.0);
        let frame = g.orthonormal_frame();
        let ct = c.in_frame(&frame);
        let y = array![0.2, -0.5, 1.1];
        let x = frame.dot(&y);
        let a = c.contract(x.view(), x.view(), x.view());
        let b = ct.contract(y.view(), y.view(), y.view());
        assert!((a - b).abs() < 1e-12);
    }
}
