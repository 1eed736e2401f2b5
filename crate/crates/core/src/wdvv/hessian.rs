//! Curvature of a Hessian metric `g = Hess φ` in closed form.

use ndarray::{Array3, Array4};

use crate::error::{Error, Result};
use crate::fields::{ChartField, ChartKind};
use crate::tensor::Metric;

/// `W_ijkl = g^{pq} (φ_ilp φ_jkq - φ_ikp φ_jlq)`.
pub fn wdvv_hessian_tensor(g: &Metric, phi3: &Array3<f64>) -> Array4<f64> {
    let n = g.dim();
    let gi = g.inverse();
    // raised[[i, l, q]] = g^{qp} φ_ilp
    let mut raised = Array3::<f64>::zeros((n, n, n));
    for i in 0..n {
        for l in 0..n {
            for q in 0..n {
                raised[[i, l, q]] = (0..n).map(|p| gi[[q, p]] * phi3[[i, l, p]]).sum();
            }
        }
    }
    let pair = |a: usize, b: usize, c: usize, d: usize| -> f64 { (0..n).map(|q| raised[[a, b, q]] * phi3[[c, d, q]]).sum() };
    Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| pair(i, l, j, k) - pair(i, k, j, l))
}

/// `R̂_ijkl = ¼ g^{pq} (φ_ilp φ_jkq - φ_ikp φ_jlq)`, lowered as
/// `R̂_ijkl = g(R̂(e_i, e_j) e_l, e_k)`.
pub fn hessian_curvature_tensor(g: &Metric, phi3: &Array3<f64>) -> Array4<f64> {
    wdvv_hessian_tensor(g, phi3) * 0.25
}

fn hessian_data(chart: &ChartField, x: &[f64]) -> Result<(Metric, Array3<f64>)> {
    if !matches!(chart.kind(), ChartKind::Hessian { .. }) {
        return Err(Error::Invalid(format!("{} chart has no Hessian potential", chart.kind_name())));
    }
    let (g, c) = chart.evaluate(x)?;
    // C = -½ φ_ijk, so -2C recovers φ_ijk exactly.
    Ok((g, c.amari_chentsov()))
}

/// Levi-Civita curvature of a Hessian chart from third derivatives of `φ`.
pub fn hessian_curvature(chart: &ChartField, x: &[f64]) -> Result<Array4<f64>> {
    let (g, phi3) = hessian_data(chart, x)?;
    Ok(hessian_curvature_tensor(&g, &phi3))
}

/// `max |g^{pq} (φ_ilp φ_jkq - φ_ikp φ_jlq)|` over all index quadruples.
pub fn wdvv_residual_hessian(chart: &ChartField, x: &[f64]) -> Result<f64> {
    let (g, phi3) = hessian_data(chart, x)?;
    Ok(wdvv_hessian_tensor(&g, &phi3).iter().fold(0.0, |m, v| m.max(v.abs())))
}
