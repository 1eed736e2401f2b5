use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative asymmetry above which inputs are rejected instead of symmetrized.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A positive-definite inner product on one tangent space.
///
/// Construction symmetrizes the input, records the discarded asymmetry, and
/// caches the Cholesky factor and the inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    g: Array2<f64>,
    inv: Array2<f64>,
    chol: Array2<f64>,
    asymmetry: f64,
}

impl Metric {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch { expected: n.max(1), actual: entries.ncols() });
        }
        let scale = linalg::max_abs(entries.iter()).max(f64::MIN_POSITIVE);
        let mut asym = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((entries[[i, j]] - entries[[j, i]]).abs());
            }
        }
        let asymmetry = asym / scale;
        if asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric { what: "metric", asymmetry });
        }
        let g = linalg::symmetrize(entries.view());
        let chol = linalg::cholesky(g.view())?;
        let inv = linalg::symmetrize(linalg::Lu::new(g.view()).inverse().view());
        Ok(Metric { g, inv, chol, asymmetry })
    }

    pub fn identity(dim: usize) -> Self {
        Metric {
            g: Array2::eye(dim),
            inv: Array2::eye(dim),
            chol: Array2::eye(dim),
            asymmetry: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.g
    }

    pub fn inverse(&self) -> &Array2<f64> {
        &self.inv
    }

    pub fn cholesky(&self) -> &Array2<f64> {
        &self.chol
    }

    /// Relative asymmetry discarded on construction.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn inner(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        x.dot(&self.g.dot(&y))
    }

    pub fn norm(&self, x: ArrayView1<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Columns form a g-orthonormal basis: `L^{-T}` for `g = L Lᵀ`.
    pub fn orthonormal_frame(&self) -> Array2<f64> {
        linalg::lower_triangular_inverse(self.chol.view()).t().to_owned()
    }

    /// Coordinates of `x` in the frame returned by [`Metric::orthonormal_frame`].
    pub fn to_orthonormal(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.chol.t().dot(&x)
    }
}
