//! Pointwise quantities behind the statements "∇̂C = 0 iff the idempotents
//! are parallel" and "∇̂C = 0 and ∇̂E = 0 force constant g(u_i, u_i)".

use ndarray::{Array1, Array2};
use serde::Serialize;

use super::{canonical_idempotents, IdempotentFrame};
use crate::error::Result;
use crate::fields::ChartField;
use crate::geometry::{CovariantCubic, PointGeometry};
use crate::linalg;
use crate::tensor::bracket;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    pub point: Vec<f64>,
    pub bracket_norm: f64,
    /// `max |∇̂C|`.
    pub nabla_c_norm: f64,
    /// `max |(∇̂_i C)_jkl - (∇̂_j C)_ikl|`.
    pub nabla_c_asymmetry: f64,
    /// `max |∇̂E|`.
    pub nabla_e_norm: f64,
    /// `f_ij = g(∇̂_{u_i} u_j, u_j)`.
    pub f: Vec<Vec<f64>>,
    /// `g(u_i, u_i)`.
    pub u_norms: Vec<f64>,
    /// `max_{a,m} |(∇̂_a u_i)^m|`.
    pub u_gradient_norms: Vec<f64>,
    /// `max_a |∂_a g(u_i, u_i)|`.
    pub u_norm_gradients: Vec<f64>,
    pub idempotents: IdempotentFrame,
}

/// Diagnostics at one point. Derivatives of the idempotents come from
/// differentiating `K(u, u) = u`: `(2K_u - I) ∂_a u = -(∂_a K)(u, u)`, where
/// `2K_u - I` has eigenvalues `±1` and is always invertible.
pub fn rigidity_diagnostics(chart: &ChartField, x: &[f64], tol: f64, seed: u64) -> Result<RigidityReport> {
    let geo = PointGeometry::at(chart, x)?;
    let n = geo.dim();
    let k = geo.k_operator()?;
    let frame = canonical_idempotents(&k, tol, seed)?;
    let g = geo.metric();
    let lc = geo.christoffel(0.0);
    let lc = lc.data();
    let dk = geo.k_derivative();

    let mut nabla_u = Vec::with_capacity(n);
    for i in 0..n {
        let u = frame.vector(i);
        let mut lhs = k.operator(u.view()) * 2.0;
        for d in 0..n {
            lhs[[d, d]] -= 1.0;
        }
        let lu = linalg::Lu::new(lhs.view());
        // (∇̂_a u)^m at [[a, m]]
        let mut grad = Array2::<f64>::zeros((n, n));
        for a in 0..n {
            let rhs = Array1::from_shape_fn(n, |m| {
                let mut s = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        s -= dk[[a, m, p, q]] * u[p] * u[q];
                    }
                }
                s
            });
            let du = lu.solve(rhs.view());
            for m in 0..n {
                grad[[a, m]] = du[m] + (0..n).map(|p| lc[[m, a, p]] * u[p]).sum::<f64>();
            }
        }
        nabla_u.push(grad);
    }

    let f = (0..n)
        .map(|i| {
            let ui = frame.vector(i);
            (0..n)
                .map(|j| {
                    let uj = frame.vector(j);
                    let along = nabla_u[j].t().dot(&ui);
                    g.inner(along.view(), uj.view())
                })
                .collect()
        })
        .collect();
    let u_norm_gradients = (0..n)
        .map(|i| {
            let u = frame.vector(i);
            (0..n).fold(0.0_f64, |m, a| m.max((2.0 * g.inner(nabla_u[i].row(a), u.view())).abs()))
        })
        .collect();

    let nabla_c = CovariantCubic::new(geo.covariant_derivative_c());
    let (_, nabla_e) = geo.trace_field();
    Ok(RigidityReport {
        point: x.to_vec(),
        bracket_norm: bracket(&k).max_norm(),
        nabla_c_norm: linalg::max_abs(nabla_c.data.iter()),
        nabla_c_asymmetry: nabla_c.asymmetry,
        nabla_e_norm: linalg::max_abs(nabla_e.iter()),
        f,
        u_norms: frame.norms.iter().map(|v| v * v).collect(),
        u_gradient_norms: nabla_u.iter().map(|d| linalg::max_abs(d.iter())).collect(),
        u_norm_gradients,
        idempotents: frame,
    })
}

/// Diagnostics over a point cloud, with the largest value of each quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudRigidity {
    pub reports: Vec<RigidityReport>,
    pub max_nabla_c: f64,
    pub max_nabla_e: f64,
    pub max_f: f64,
    pub max_u_gradient: f64,
    /// Largest spread of the sorted `g(u_i, u_i)` across the cloud.
    pub u_norm_spread: f64,
}

pub fn rigidity_over_cloud(chart: &ChartField, points: &[Vec<f64>], tol: f64, seed: u64) -> Result<CloudRigidity> {
    let reports = points
        .iter()
        .map(|x| rigidity_diagnostics(chart, x, tol, seed))
        .collect::<Result<Vec<_>>>()?;
    let fold = |get: &dyn Fn(&RigidityReport) -> f64| reports.iter().fold(0.0_f64, |m, r| m.max(get(r)));
    let max_nabla_c = fold(&|r| r.nabla_c_norm);
    let max_nabla_e = fold(&|r| r.nabla_e_norm);
    let max_f = fold(&|r| r.f.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())));
    let max_u_gradient = fold(&|r| r.u_gradient_norms.iter().fold(0.0_f64, |m, v| m.max(*v)));
    let sorted: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| {
            let mut v = r.u_norms.clone();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let mut u_norm_spread = 0.0_f64;
    if let Some(first) = sorted.first() {
        for i in 0..first.len() {
            let lo = sorted.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
            let hi = sorted.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
            u_norm_spread = u_norm_spread.max(hi - lo);
        }
    }
    Ok(CloudRigidity { reports, max_nabla_c, max_nabla_e, max_f, max_u_gradient, u_norm_spread })
}
