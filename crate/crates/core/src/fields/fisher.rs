//! Fisher metric and Amari-Chentsov tensor of a family on a finite sample space.

use ndarray::{Array2, Array3, Array4};

use super::chart::{ChartField, ChartKind, Derivatives};
use super::expr::ScalarExpr;
use super::fd::FdPolicy;
use crate::error::{Error, Result};
use crate::tensor::Metric;

/// Allowed deviation of the total probability from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// `g_ij = Σ_x p ∂_iℓ ∂_jℓ` and `T_ijk = Σ_x p ∂_iℓ ∂_jℓ ∂_kℓ` at `θ`.
pub fn fisher_finite_family(chart: &ChartField, theta: &[f64]) -> Result<(Metric, Array3<f64>)> {
    match chart.kind() {
        ChartKind::FiniteFamily { log_probs } => {
            if theta.len() != chart.dim() {
                return Err(Error::DimensionMismatch { expected: chart.dim(), actual: theta.len() });
            }
            fisher_scores(log_probs, theta, chart.fd())
        }
        _ => Err(Error::Invalid(format!("{} chart is not a finite family", chart.kind_name()))),
    }
}

/// Probabilities at `θ`, checked for positivity and normalization.
pub fn probabilities(log_probs: &[ScalarExpr], theta: &[f64]) -> Result<Vec<f64>> {
    let mut p = Vec::with_capacity(log_probs.len());
    for (outcome, l) in log_probs.iter().enumerate() {
        let v = l.eval(theta)?.exp();
        if !(v > 0.0) {
            return Err(Error::NonPositiveProbability { outcome, point: theta.to_vec() });
        }
        p.push(v);
    }
    let total: f64 = p.iter().sum();
    if !((total - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
        return Err(Error::NotNormalized { point: theta.to_vec(), total });
    }
    Ok(p)
}

pub(crate) fn fisher_scores(log_probs: &[ScalarExpr], theta: &[f64], fd: &FdPolicy) -> Result<(Metric, Array3<f64>)> {
    let n = theta.len();
    let p = probabilities(log_probs, theta)?;
    let mut g = Array2::<f64>::zeros((n, n));
    let mut t = Array3::<f64>::zeros((n, n, n));
    for (l, &pr) in log_probs.iter().zip(&p) {
        let mut d = Derivatives::new(|x: &[f64]| l.eval(x), theta, *fd);
        let s: Vec<f64> = (0..n).map(|i| d.get(&[i])).collect();
        d.finish()?;
        for i in 0..n {
            for j in 0..n {
                g[[i, j]] += pr * s[i] * s[j];
                for k in 0..n {
                    t[[i, j, k]] += pr * s[i] * s[j] * s[k];
                }
            }
        }
    }
    let metric = Metric::new(g).map_err(|_| Error::SingularFisher { point: theta.to_vec() })?;
    Ok((metric, t))
}

pub(crate) struct FisherJet {
    pub dg: Array3<f64>,
    pub ddg: Array4<f64>,
    pub dt: Array4<f64>,
}

/// Derivatives of the Fisher metric and of `T` from derivatives of `ℓ` up to
/// third order, using `∂_k p = p ∂_kℓ`.
pub(crate) fn fisher_jet(log_probs: &[ScalarExpr], theta: &[f64], fd: &FdPolicy) -> Result<FisherJet> {
    let n = theta.len();
    let p = probabilities(log_probs, theta)?;
    let mut dg = Array3::<f64>::zeros((n, n, n));
    let mut ddg = Array4::<f64>::zeros((n, n, n, n));
    let mut dt = Array4::<f64>::zeros((n, n, n, n));
    for (l, &pr) in log_probs.iter().zip(&p) {
        let mut d = Derivatives::new(|x: &[f64]| l.eval(x), theta, *fd);
        let l1: Vec<f64> = (0..n).map(|i| d.get(&[i])).collect();
        let l2 = Array2::from_shape_fn((n, n), |(i, j)| d.get(&[i, j]));
        let l3 = Array3::from_shape_fn((n, n, n), |(i, j, k)| d.get(&[i, j, k]));
        d.finish()?;
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    // ∂_a g_ij
                    let first = l1[a] * l1[i] * l1[j] + l2[[a, i]] * l1[j] + l1[i] * l2[[a, j]];
                    dg[[a, i, j]] += pr * first;
                    for b in 0..n {
                        // ∂_b ∂_a g_ij
                        let second = l1[b] * first
                            + l2[[b, a]] * l1[i] * l1[j]
                            + l1[a] * l2[[b, i]] * l1[j]
                            + l1[a] * l1[i] * l2[[b, j]]
                            + l3[[b, a, i]] * l1[j]
                            + l2[[a, i]] * l2[[b, j]]
                            + l2[[b, i]] * l2[[a, j]]
                            + l1[i] * l3[[b, a, j]];
                        ddg[[b, a, i, j]] += pr * second;
                    }
                    for k in 0..n {
                        // ∂_a T_ijk
                        let v = l1[a] * l1[i] * l1[j] * l1[k]
                            + l2[[a, i]] * l1[j] * l1[k]
                            + l1[i] * l2[[a, j]] * l1[k]
                            + l1[i] * l1[j] * l2[[a, k]];
                        dt[[a, i, j, k]] += pr * v;
                    }
                }
            }
        }
    }
    Ok(FisherJet { dg, ddg, dt })
}
