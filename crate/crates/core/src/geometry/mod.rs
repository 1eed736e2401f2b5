//! Connections and curvature of the statistical structure on a chart.
//!
//! Conventions: `Γ^k_ij` is stored as `[[k, i, j]]`; the connection with
//! parameter α is `∇^(α) = ∇̂ + αK`, so α = 1 is `∇` and α = -1 is `∇̄`.
//! Curvature is `R(X,Y)Z = ∇_X∇_YZ - ∇_Y∇_XZ - ∇_{[X,Y]}Z` with mixed
//! components `R^l_kij` (component `l` of `R(e_i, e_j) e_k`) stored as
//! `[[l, k, i, j]]`, and lowered as `R_ijkl = g(R(e_i, e_j) e_l, e_k)`.
//!
//! All quantities at a point are formed algebraically from one jet
//! `(g, ∂g, ∂∂g, C, ∂C)` of the chart; no finite difference is nested inside
//! another.

use ndarray::{Array1, Array2, Array3, Array4, ArrayView1};
use serde::Serialize;

use crate::error::Result;
use crate::fields::{ChartField, ChartJet};
use crate::linalg;
use crate::tensor::{bracket, CubicTensor, KOperator, Metric};

/// Convention string recorded in reports.
pub const CURVATURE_CONVENTION: &str =
    "R(X,Y)Z = ∇_X∇_YZ - ∇_Y∇_XZ - ∇_[X,Y]Z; R_ijkl = g(R(e_i,e_j)e_l, e_k); ∇^(α) = ∇̂ + αK";

/// Identity tolerance when every jet entry came from a single FD pass of a
/// potential (Hessian and finite-family charts).
pub const CLOSED_PATH_TOLERANCE: f64 = 1e-6;
/// Identity tolerance for charts whose metric is differentiated twice.
pub const NESTED_FD_TOLERANCE: f64 = 1e-4;

/// α values at which the `R^(α)` decomposition is checked.
pub const ALPHA_GRID: [f64; 5] = [0.0, 0.5, -0.5, 2.0, -2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    data: Array3<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.data.dim().0
    }

    /// `Γ^k_ij` at `[[k, i, j]]`.
    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    /// `Γ_ijk = Γ^h_ij g_hk`.
    pub fn first_kind(&self, g: &Metric) -> Array3<f64> {
        let n = self.dim();
        let gm = g.matrix();
        Array3::from_shape_fn((n, n, n), |(i, j, k)| (0..n).map(|h| self.data[[h, i, j]] * gm[[h, k]]).sum())
    }

    /// Largest `|Γ^k_ij - Γ^k_ji|`.
    pub fn torsion(&self) -> f64 {
        let n = self.dim();
        let mut t = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    t = t.max((self.data[[k, i, j]] - self.data[[k, j, i]]).abs());
                }
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    mixed: Array4<f64>,
    lowered: Array4<f64>,
}

impl CurvatureTensor {
    fn from_mixed(mixed: Array4<f64>, g: &Metric) -> Self {
        let n = mixed.dim().0;
        let gm = g.matrix();
        let lowered = Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| {
            (0..n).map(|m| gm[[k, m]] * mixed[[m, l, i, j]]).sum()
        });
        CurvatureTensor { mixed, lowered }
    }

    pub fn dim(&self) -> usize {
        self.mixed.dim().0
    }

    /// `R^l_kij` at `[[l, k, i, j]]`.
    pub fn mixed(&self) -> &Array4<f64> {
        &self.mixed
    }

    /// `R_ijkl = g(R(e_i, e_j) e_l, e_k)`.
    pub fn lowered(&self) -> &Array4<f64> {
        &self.lowered
    }

    /// Largest `|R^l_kij + R^l_kji|` relative to `max(1, max |R|)`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim();
        let scale = linalg::max_abs(self.mixed.iter()).max(1.0);
        let mut r = 0.0_f64;
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        r = r.max((self.mixed[[l, k, i, j]] + self.mixed[[l, k, j, i]]).abs());
                    }
                }
            }
        }
        r / scale
    }

    /// Sectional curvature `g(R(x,y)y, x) / (|x|²|y|² - g(x,y)²)`.
    pub fn sectional(&self, g: &Metric, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
        let gram = g.inner(x, x) * g.inner(y, y) - g.inner(x, y).powi(2);
        let scale = g.inner(x, x) * g.inner(y, y);
        if !(gram > crate::tensor::DEGENERATE_PLANE * scale) {
            return Err(crate::error::Error::DegeneratePlane { gram: gram / scale.max(f64::MIN_POSITIVE) });
        }
        let n = self.dim();
        let mut num = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        // g(R(x,y)y, x) = R_ijkl x^i y^j x^k y^l
                        num += self.lowered[[i, j, k, l]] * x[i] * y[j] * x[k] * y[l];
                    }
                }
            }
        }
        Ok(num / gram)
    }
}

/// Connection data of a chart at one point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    jet: ChartJet,
    /// `Γ̂^k_ij` at `[[k, i, j]]`.
    lc: Array3<f64>,
    /// `∂_a Γ̂^k_ij` at `[[a, k, i, j]]`.
    dlc: Array4<f64>,
    /// `K^k_ij` at `[[k, i, j]]`.
    k: Array3<f64>,
    /// `∂_a K^k_ij` at `[[a, k, i, j]]`.
    dk: Array4<f64>,
}

impl PointGeometry {
    pub fn at(chart: &ChartField, x: &[f64]) -> Result<Self> {
        Ok(Self::from_jet(chart.jet(x)?))
    }

    pub fn from_jet(jet: ChartJet) -> Self {
        let n = jet.metric.dim();
        let gi = jet.metric.inverse().clone();
        let dg = &jet.dg;
        let ddg = &jet.ddg;
        let c = jet.cubic.data();
        let dc = &jet.dc;

        // ∂_a g^{mk} = -g^{mp} ∂_a g_pq g^{qk}
        let mut dgi = Array3::<f64>::zeros((n, n, n));
        for a in 0..n {
            let da = dg.index_axis(ndarray::Axis(0), a);
            let v = -gi.dot(&da).dot(&gi);
            dgi.index_axis_mut(ndarray::Axis(0), a).assign(&v);
        }

        let first = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
            0.5 * (dg[[i, j, k]] + dg[[j, i, k]] - dg[[k, i, j]])
        });
        let dfirst = Array4::from_shape_fn((n, n, n, n), |(a, i, j, k)| {
            0.5 * (ddg[[a, i, j, k]] + ddg[[a, j, i, k]] - ddg[[a, k, i, j]])
        });

        let raise = |t: &Array3<f64>| {
            Array3::from_shape_fn((n, n, n), |(m, i, j)| (0..n).map(|k| gi[[m, k]] * t[[i, j, k]]).sum())
        };
        let lc = raise(&first);
        let k = raise(&c.to_owned());
        let raise_derivative = |t: &Array3<f64>, dt: &Array4<f64>| {
            Array4::from_shape_fn((n, n, n, n), |(a, m, i, j)| {
                (0..n).map(|p| dgi[[a, m, p]] * t[[i, j, p]] + gi[[m, p]] * dt[[a, i, j, p]]).sum()
            })
        };
        let dlc = raise_derivative(&first, &dfirst);
        let dk = raise_derivative(&c.to_owned(), dc);
        PointGeometry { jet, lc, dlc, k, dk }
    }

    pub fn dim(&self) -> usize {
        self.jet.metric.dim()
    }

    pub fn jet(&self) -> &ChartJet {
        &self.jet
    }

    pub fn metric(&self) -> &Metric {
        &self.jet.metric
    }

    pub fn cubic(&self) -> &CubicTensor {
        &self.jet.cubic
    }

    pub fn k_operator(&self) -> Result<KOperator> {
        KOperator::new(self.k.clone(), self.jet.metric.clone())
    }

    /// `∂_a K^m_ij` at `[[a, m, i, j]]`.
    pub fn k_derivative(&self) -> &Array4<f64> {
        &self.dk
    }

    pub fn christoffel(&self, alpha: f64) -> Christoffel {
        if alpha == 0.0 {
            return Christoffel { data: self.lc.clone() };
        }
        Christoffel { data: &self.lc + &(&self.k * alpha) }
    }

    fn christoffel_derivative(&self, alpha: f64) -> Array4<f64> {
        if alpha == 0.0 {
            return self.dlc.clone();
        }
        &self.dlc + &(&self.dk * alpha)
    }

    /// `R^l_kij = ∂_iΓ^l_jk - ∂_jΓ^l_ik + Γ^l_im Γ^m_jk - Γ^l_jm Γ^m_ik`.
    pub fn curvature(&self, alpha: f64) -> CurvatureTensor {
        let n = self.dim();
        let gam = self.christoffel(alpha).data;
        let dgam = self.christoffel_derivative(alpha);
        let mixed = Array4::from_shape_fn((n, n, n, n), |(l, k, i, j)| {
            let mut v = dgam[[i, l, j, k]] - dgam[[j, l, i, k]];
            for m in 0..n {
                v += gam[[l, i, m]] * gam[[m, j, k]] - gam[[l, j, m]] * gam[[m, i, k]];
            }
            v
        });
        CurvatureTensor::from_mixed(mixed, &self.jet.metric)
    }

    /// `(∇̂_i K)^l_jk` at `[[i, l, j, k]]`.
    pub fn covariant_derivative_k(&self) -> Array4<f64> {
        let n = self.dim();
        let (g, k, dk) = (&self.lc, &self.k, &self.dk);
        Array4::from_shape_fn((n, n, n, n), |(i, l, j, kk)| {
            let mut v = dk[[i, l, j, kk]];
            for m in 0..n {
                v += g[[l, i, m]] * k[[m, j, kk]] - g[[m, i, j]] * k[[l, m, kk]] - g[[m, i, kk]] * k[[l, j, m]];
            }
            v
        })
    }

    /// `(∇̂_i C)_jkl` at `[[i, j, k, l]]`.
    pub fn covariant_derivative_c(&self) -> Array4<f64> {
        let n = self.dim();
        let c = self.jet.cubic.data();
        let (g, dc) = (&self.lc, &self.jet.dc);
        Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| {
            let mut v = dc[[i, j, k, l]];
            for m in 0..n {
                v -= g[[m, i, j]] * c[[m, k, l]] + g[[m, i, k]] * c[[j, m, l]] + g[[m, i, l]] * c[[j, k, m]];
            }
            v
        })
    }

    /// Largest `|∇̂_a g_ij|`, zero up to roundoff by construction of `Γ̂`.
    pub fn metric_compatibility(&self) -> f64 {
        let n = self.dim();
        let gm = self.jet.metric.matrix();
        let mut r = 0.0_f64;
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = self.jet.dg[[a, i, j]];
                    for m in 0..n {
                        v -= self.lc[[m, a, i]] * gm[[m, j]] + self.lc[[m, a, j]] * gm[[i, m]];
                    }
                    r = r.max(v.abs());
                }
            }
        }
        r
    }

    /// `E^h = g^{ij} K^h_ij` and `(∇̂_i E)^h` at `[[i, h]]`.
    pub fn trace_field(&self) -> (Array1<f64>, Array2<f64>) {
        let n = self.dim();
        let gi = self.jet.metric.inverse();
        let e = Array1::from_shape_fn(n, |h| {
            let mut v = 0.0;
            for i in 0..n {
                for j in 0..n {
                    v += gi[[i, j]] * self.k[[h, i, j]];
                }
            }
            v
        });
        // ∂_a g^{ij} = -g^{ip} ∂_a g_pq g^{qj}
        let de = Array2::from_shape_fn((n, n), |(a, h)| {
            let da = self.jet.dg.index_axis(ndarray::Axis(0), a);
            let dgi = -gi.dot(&da).dot(gi);
            let mut v = 0.0;
            for i in 0..n {
                for j in 0..n {
                    v += dgi[[i, j]] * self.k[[h, i, j]] + gi[[i, j]] * self.dk[[a, h, i, j]];
                }
            }
            v
        });
        let nabla = Array2::from_shape_fn((n, n), |(i, h)| {
            de[[i, h]] + (0..n).map(|m| self.lc[[h, i, m]] * e[m]).sum::<f64>()
        });
        (e, nabla)
    }

    pub fn identity_report(&self) -> Result<IdentityReport> {
        let n = self.dim();
        let r_hat = self.curvature(0.0);
        let r = self.curvature(1.0);
        let r_bar = self.curvature(-1.0);
        let kk = bracket(&self.k_operator()?);
        let kk_mixed = kk.mixed();
        let frob = |a: &Array4<f64>| linalg::frobenius(a.iter());
        let normalized = |diff: f64, norms: &[f64]| diff / norms.iter().fold(1.0_f64, |m, v| m.max(*v));
        let max_abs = |a: &Array4<f64>| linalg::max_abs(a.iter());

        // duality: g(R(Z,W)X, Y) + g(R̄(Z,W)Y, X) = R_ijkl + R̄_ijlk
        let rl = r.lowered();
        let rbl = r_bar.lowered();
        let dual = Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| rl[[i, j, k, l]] + rbl[[i, j, l, k]]);
        let duality = normalized(max_abs(&dual), &[frob(rl), frob(rbl)]);

        let gauss_diff = r.mixed() + r_bar.mixed() - &(r_hat.mixed() * 2.0) - &(kk_mixed * 2.0);
        let gauss = normalized(
            max_abs(&gauss_diff),
            &[frob(r.mixed()), frob(r_bar.mixed()), 2.0 * frob(r_hat.mixed()), 2.0 * frob(kk_mixed)],
        );

        let nk = self.covariant_derivative_k();
        // 2(∇̂_i K)^l_jk - 2(∇̂_j K)^l_ik at [[l, k, i, j]]
        let alt = Array4::from_shape_fn((n, n, n, n), |(l, k, i, j)| 2.0 * (nk[[i, l, j, k]] - nk[[j, l, i, k]]));
        let codazzi_diff = r.mixed() - r_bar.mixed() - &alt;
        let codazzi = normalized(max_abs(&codazzi_diff), &[frob(r.mixed()), frob(r_bar.mixed()), frob(&alt)]);

        let mut zhang = Vec::new();
        for alpha in ALPHA_GRID {
            let ra = self.curvature(alpha);
            let a = (1.0 + alpha) / 2.0;
            let b = (1.0 - alpha) / 2.0;
            let c = 1.0 - alpha * alpha;
            let diff = ra.mixed() - &(r.mixed() * a) - &(r_bar.mixed() * b) + &(kk_mixed * c);
            let res = normalized(
                max_abs(&diff),
                &[frob(ra.mixed()), a.abs() * frob(r.mixed()), b.abs() * frob(r_bar.mixed()), c.abs() * frob(kk_mixed)],
            );
            zhang.push(AlphaResidual { alpha, residual: res });
        }
        let mut zhang_difference = Vec::new();
        for alpha in [0.5, 2.0] {
            let rp = self.curvature(alpha);
            let rm = self.curvature(-alpha);
            let rhs = (r.mixed() - r_bar.mixed()) * alpha;
            let diff = rp.mixed() - rm.mixed() - &rhs;
            let res = normalized(max_abs(&diff), &[frob(rp.mixed()), frob(rm.mixed()), frob(&rhs)]);
            zhang_difference.push(AlphaResidual { alpha, residual: res });
        }

        let tolerance = if self.jet.closed_path { CLOSED_PATH_TOLERANCE } else { NESTED_FD_TOLERANCE };
        let antisymmetry = [r_hat.antisymmetry_residual(), r.antisymmetry_residual(), r_bar.antisymmetry_residual()]
            .into_iter()
            .fold(0.0, f64::max);
        let mut report = IdentityReport {
            point: self.jet.point.clone(),
            convention: CURVATURE_CONVENTION,
            duality,
            gauss,
            codazzi,
            zhang,
            zhang_difference,
            antisymmetry,
            metric_compatibility: self.metric_compatibility(),
            tolerance,
            pass: false,
        };
        report.pass = report.max_residual() < tolerance;
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaResidual {
    pub alpha: f64,
    pub residual: f64,
}

/// Normalized residuals of the curvature identities at one point. Each
/// residual is the max-norm of the difference divided by `max(1, largest
/// Frobenius norm among the participating tensors)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub point: Vec<f64>,
    pub convention: &'static str,
    /// `g(R(Z,W)X, Y) + g(R̄(Z,W)Y, X) = 0`.
    pub duality: f64,
    /// `R + R̄ = 2R̂ + 2[K,K]`.
    pub gauss: f64,
    /// `R - R̄ = 2(∇̂_X K)_Y - 2(∇̂_Y K)_X`.
    pub codazzi: f64,
    /// `R^(α) = (1+α)/2 R + (1-α)/2 R̄ - (1-α²)[K,K]`.
    pub zhang: Vec<AlphaResidual>,
    /// `R^(α) - R^(-α) = α(R - R̄)`.
    pub zhang_difference: Vec<AlphaResidual>,
    /// Antisymmetry of `R̂, R, R̄` in the `(X, Y)` pair.
    pub antisymmetry: f64,
    /// Largest `|∇̂g|`.
    pub metric_compatibility: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        let mut m = self.duality.max(self.gauss).max(self.codazzi).max(self.antisymmetry);
        for r in self.zhang.iter().chain(&self.zhang_difference) {
            m = m.max(r.residual);
        }
        m
    }
}

/// `∇̂C` together with its largest asymmetry under exchange of the
/// derivative slot and the first slot of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantCubic {
    /// `(∇̂_i C)_jkl` at `[[i, j, k, l]]`.
    pub data: Array4<f64>,
    /// `max |(∇̂_i C)_jkl - (∇̂_j C)_ikl|`.
    pub asymmetry: f64,
    /// `asymmetry / max(1, max |∇̂C|)`.
    pub relative_asymmetry: f64,
}

impl CovariantCubic {
    pub fn new(data: Array4<f64>) -> Self {
        let n = data.dim().0;
        let mut asymmetry = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        asymmetry = asymmetry.max((data[[i, j, k, l]] - data[[j, i, k, l]]).abs());
                    }
                }
            }
        }
        let relative_asymmetry = asymmetry / linalg::max_abs(data.iter()).max(1.0);
        CovariantCubic { data, asymmetry, relative_asymmetry }
    }
}

pub fn levi_civita(chart: &ChartField, x: &[f64]) -> Result<Christoffel> {
    Ok(PointGeometry::at(chart, x)?.christoffel(0.0))
}

pub fn alpha_connection(chart: &ChartField, x: &[f64], alpha: f64) -> Result<Christoffel> {
    Ok(PointGeometry::at(chart, x)?.christoffel(alpha))
}

pub fn curvature(chart: &ChartField, x: &[f64], alpha: f64) -> Result<CurvatureTensor> {
    Ok(PointGeometry::at(chart, x)?.curvature(alpha))
}

pub fn identity_suite(chart: &ChartField, x: &[f64]) -> Result<IdentityReport> {
    PointGeometry::at(chart, x)?.identity_report()
}

pub fn covariant_derivative_c(chart: &ChartField, x: &[f64]) -> Result<CovariantCubic> {
    Ok(CovariantCubic::new(PointGeometry::at(chart, x)?.covariant_derivative_c()))
}

/// `E^h = g^{ij} K^h_ij` and `∇̂E` with `(∇̂_i E)^h` at `[[i, h]]`.
pub fn trace_field_e(chart: &ChartField, x: &[f64]) -> Result<(Array1<f64>, Array2<f64>)> {
    Ok(PointGeometry::at(chart, x)?.trace_field())
}

#[cfg(test)]
mod tests;
