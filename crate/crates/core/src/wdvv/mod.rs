//! Associativity (WDVV) equations for prepotentials and Hessian potentials.
//!
//! For a prepotential `F` with third derivatives `F_ijk`, structure matrices
//! `(F_i)_jk = F_ijk` and unit coefficients `A_k`, the metric
//! `B_ij = Σ_k A_k F_ijk` must be invertible and the equations read
//! `F_i B⁻¹ F_j = F_j B⁻¹ F_i` for all `i, j`.

mod bcn;
mod hessian;

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

pub use bcn::{BcnParams, DEFAULT_MARGIN};
pub use hessian::{hessian_curvature, hessian_curvature_tensor, wdvv_hessian_tensor, wdvv_residual_hessian};

use crate::error::{Error, Result};
use crate::fields::{upper_triples, Derivatives, FdPolicy, ScalarExpr};
use crate::linalg::{self, Lu};
use crate::tensor::permutations_of;

/// Default threshold for WDVV residuals and for the `B = h I` checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Relative determinant below which `B` counts as singular.
pub const SINGULAR_B: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Prepotential {
    Bcn { params: BcnParams, margin: f64 },
    Expr { dim: usize, f: ScalarExpr, a: Vec<ScalarExpr>, fd: FdPolicy },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum PrepotentialConfig {
    Bcn {
        n: usize,
        s: f64,
        q: f64,
        #[serde(default)]
        r: Option<f64>,
        #[serde(default = "default_margin")]
        margin: f64,
        #[serde(default)]
        domain: Option<Vec<[f64; 2]>>,
    },
    Prepotential {
        dim: usize,
        #[serde(rename = "F")]
        f: String,
        #[serde(rename = "A")]
        a: Vec<String>,
        #[serde(default)]
        domain: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        fd: FdPolicy,
    },
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

/// A prepotential together with the box that samplers draw from.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepotentialChart {
    pub prepotential: Prepotential,
    pub domain: Vec<[f64; 2]>,
}

impl PrepotentialChart {
    /// Parses `{"type":"bcn",...}` or `{"type":"prepotential",...}`. The
    /// sampling box defaults to `[-2, 2]^n`.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: PrepotentialConfig =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("prepotential JSON: {e}")))?;
        let (prepotential, domain) = match config {
            PrepotentialConfig::Bcn { n, s, q, r, margin, domain } => {
                let params = match r {
                    Some(r) => BcnParams::with_r(n, s, q, r),
                    None => BcnParams::new(n, s, q),
                }?;
                (Prepotential::bcn_with_margin(params, margin)?, domain)
            }
            PrepotentialConfig::Prepotential { dim, f, a, domain, fd } => {
                (Prepotential::expression(dim, &f, &a.iter().map(String::as_str).collect::<Vec<_>>(), fd)?, domain)
            }
        };
        let n = prepotential.dim();
        let domain = domain.unwrap_or_else(|| vec![[-2.0, 2.0]; n]);
        if domain.len() != n || domain.iter().any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
            return Err(Error::Invalid(format!("expected {n} finite intervals")).in_field("domain"));
        }
        Ok(PrepotentialChart { prepotential, domain })
    }
}

impl Prepotential {
    pub fn bcn(params: BcnParams) -> Self {
        Prepotential::Bcn { params, margin: DEFAULT_MARGIN }
    }

    pub fn bcn_with_margin(params: BcnParams, margin: f64) -> Result<Self> {
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::Invalid(format!("margin must be non-negative, got {margin}")).in_field("margin"));
        }
        Ok(Prepotential::Bcn { params, margin })
    }

    pub fn expression(dim: usize, f: &str, a: &[&str], fd: FdPolicy) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()).in_field("dim"));
        }
        fd.validate().map_err(|e| e.in_field("fd"))?;
        let f = ScalarExpr::parse(f, dim).map_err(|e| e.in_field("F"))?;
        if a.len() != dim {
            return Err(Error::Invalid(format!("expected {dim} unit coefficients, got {}", a.len())).in_field("A"));
        }
        let a = a
            .iter()
            .enumerate()
            .map(|(k, t)| ScalarExpr::parse(t, dim).map_err(|e| e.in_field(format!("A[{k}]"))))
            .collect::<Result<_>>()?;
        Ok(Prepotential::Expr { dim, f, a, fd })
    }

    pub fn dim(&self) -> usize {
        match self {
            Prepotential::Bcn { params, .. } => params.n,
            Prepotential::Expr { dim, .. } => *dim,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        if let Prepotential::Bcn { params, margin } = self {
            params.check_generic(x, *margin)?;
        }
        Ok(())
    }

    /// `F_ijk` at `x`: closed forms for BC_n, finite differences otherwise.
    pub fn third_derivatives(&self, x: &[f64]) -> Result<Array3<f64>> {
        self.check_point(x)?;
        match self {
            Prepotential::Bcn { params, .. } => params.third_derivatives(x),
            Prepotential::Expr { dim, f, fd, .. } => {
                let n = *dim;
                let mut d = Derivatives::new(|p: &[f64]| f.eval(p), x, *fd);
                let mut t = Array3::<f64>::zeros((n, n, n));
                for idx in upper_triples(n) {
                    let v = d.get(&idx);
                    for [a, b, c] in permutations_of(idx) {
                        t[[a, b, c]] = v;
                    }
                }
                d.finish()?;
                Ok(t)
            }
        }
    }

    pub fn unit_coefficients(&self, x: &[f64]) -> Result<Array1<f64>> {
        self.check_point(x)?;
        match self {
            Prepotential::Bcn { params, .. } => Ok(params.unit_coefficients(x)),
            Prepotential::Expr { a, .. } => a.iter().map(|e| e.eval(x)).collect(),
        }
    }
}

/// Structure matrices `(F_i)_jk = F_ijk`.
pub fn structure_matrices(p: &Prepotential, x: &[f64]) -> Result<Vec<Array2<f64>>> {
    let t = p.third_derivatives(x)?;
    Ok((0..p.dim()).map(|i| t.index_axis(ndarray::Axis(0), i).to_owned()).collect())
}

/// `B_ij = Σ_k A_k F_ijk` contracted from already computed pieces.
pub fn contract_unit(t: &Array3<f64>, a: &Array1<f64>) -> Array2<f64> {
    let n = a.len();
    Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|k| a[k] * t[[i, j, k]]).sum())
}

fn check_invertible(b: &Array2<f64>) -> Result<Lu> {
    let n = b.nrows();
    let lu = Lu::new(b.view());
    let det = lu.determinant();
    let norm = linalg::max_abs(b.iter());
    if !(det.abs() > SINGULAR_B * norm.powi(n as i32)) || !det.is_finite() {
        return Err(Error::SingularB { det: det.abs() });
    }
    Ok(lu)
}

/// The metric `B`, checked for invertibility (it may be indefinite).
pub fn unit_metric_b(p: &Prepotential, x: &[f64]) -> Result<Array2<f64>> {
    let b = contract_unit(&p.third_derivatives(x)?, &p.unit_coefficients(x)?);
    check_invertible(&b)?;
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WdvvReport {
    pub point: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    /// `h(x) = r + 2q Σ cosh 2x_k` (BC_n only).
    pub h: Option<f64>,
    /// `max_ij |B_ij - b δ_ij|` with `b` the mean diagonal entry, divided by
    /// `max(1, |h|)` (BC_n only).
    pub diagonal_deviation: Option<f64>,
    /// `max_i |B_ii - h| / max(1, |h|)` (BC_n only).
    pub h_agreement: Option<f64>,
    /// `‖F_i B⁻¹ F_j - F_j B⁻¹ F_i‖ / (‖F_i‖ ‖B⁻¹‖ ‖F_j‖)` for `i < j`
    /// (Frobenius norms).
    pub pair_residuals: Vec<PairResidual>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Per-pair WDVV residuals at `x`.
pub fn wdvv_matrix_residual(p: &Prepotential, x: &[f64], tolerance: f64) -> Result<WdvvReport> {
    let t = p.third_derivatives(x)?;
    let a = p.unit_coefficients(x)?;
    let b = contract_unit(&t, &a);
    let lu = check_invertible(&b)?;
    let b_inv = lu.inverse();
    let n = p.dim();
    let f: Vec<Array2<f64>> = (0..n).map(|i| t.index_axis(ndarray::Axis(0), i).to_owned()).collect();
    let norms: Vec<f64> = f.iter().map(|m| linalg::frobenius(m.iter())).collect();
    let inv_norm = linalg::frobenius(b_inv.iter());
    let mut pair_residuals = Vec::new();
    for i in 0..n {
        let left = f[i].dot(&b_inv);
        for j in (i + 1)..n {
            let lhs = left.dot(&f[j]);
            let rhs = f[j].dot(&b_inv).dot(&f[i]);
            let num = linalg::frobenius((&lhs - &rhs).iter());
            let den = norms[i] * inv_norm * norms[j];
            let residual = if den > 0.0 { num / den } else { num };
            pair_residuals.push(PairResidual { i, j, residual });
        }
    }
    let max_residual = pair_residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    let (h, diagonal_deviation, h_agreement) = match p {
        Prepotential::Bcn { params, .. } => {
            let h = params.h(x);
            let scale = h.abs().max(1.0);
            let mean_diag = (0..n).map(|i| b[[i, i]]).sum::<f64>() / n as f64;
            let mut dev = 0.0_f64;
            let mut agree = 0.0_f64;
            for i in 0..n {
                agree = agree.max((b[[i, i]] - h).abs());
                for j in 0..n {
                    let target = if i == j { mean_diag } else { 0.0 };
                    dev = dev.max((b[[i, j]] - target).abs());
                }
            }
            (Some(h), Some(dev / scale), Some(agree / scale))
        }
        Prepotential::Expr { .. } => (None, None, None),
    };
    let pass = max_residual < tolerance
        && diagonal_deviation.is_none_or(|d| d < tolerance)
        && h_agreement.is_none_or(|d| d < tolerance);
    Ok(WdvvReport {
        point: x.to_vec(),
        b: b.outer_iter().map(|r| r.to_vec()).collect(),
        h,
        diagonal_deviation,
        h_agreement,
        pair_residuals,
        max_residual,
        tolerance,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AafReport {
    pub params: BcnParams,
    pub on_constraint: bool,
    pub margin: f64,
    pub reports: Vec<WdvvReport>,
    pub pass: bool,
}

/// BC_n check at every point: `B` proportional to the identity, `B_ii = h(x)`,
/// and the WDVV equations. All points are checked for genericity first.
pub fn verify_bcn(params: &BcnParams, points: &[Vec<f64>], margin: f64, tolerance: f64) -> Result<AafReport> {
    let p = Prepotential::bcn_with_margin(*params, margin)?;
    for x in points {
        params.check_generic(x, margin)?;
    }
    let reports = points.iter().map(|x| wdvv_matrix_residual(&p, x, tolerance)).collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(AafReport { params: *params, on_constraint: params.on_constraint(), margin, reports, pass })
}

/// [`verify_bcn`] with `r` fixed by the constraint `r = -8s - 2q(n - 2)`.
pub fn verify_aaf(n: usize, s: f64, q: f64, points: &[Vec<f64>], margin: f64, tolerance: f64) -> Result<AafReport> {
    verify_bcn(&BcnParams::new(n, s, q)?, points, margin, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_structure() {
        let p = Prepotential::expression(1, "x1^3/6", &["1"], FdPolicy::default()).unwrap();
        let f = structure_matrices(&p, &[0.7]).unwrap();
        assert!((f[0][[0, 0]] - 1.0).abs() < 1e-8);
        let r = wdvv_matrix_residual(&p, &[0.7], DEFAULT_TOLERANCE).unwrap();
        assert!(r.pair_residuals.is_empty());
        assert_eq!(r.max_residual, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn zero_unit_coefficients_give_singular_b() {
        let p = Prepotential::expression(2, "x1^3 + x1*x2^2", &["0", "0"], FdPolicy::default()).unwrap();
        assert!(matches!(unit_metric_b(&p, &[0.3, 0.4]), Err(Error::SingularB { .. })));
        let p = Prepotential::bcn(BcnParams::new(2, 0.25, 1.0).unwrap());
        assert!(unit_metric_b(&p, &[0.3, -0.9]).is_ok());
    }

    #[test]
    fn b_matches_direct_contraction() {
        let p = Prepotential::expression(2, "x1^3*x2 + x2^4/3", &["x1", "1 + x2^2"], FdPolicy::default()).unwrap();
        let x = [0.6, -0.4];
        let b = unit_metric_b(&p, &x).unwrap();
        // F_111 = 6 x2, F_112 = 6 x1, F_122 = 0, F_222 = 8 x2
        let (x1, x2) = (x[0], x[1]);
        let a = [x1, 1.0 + x2 * x2];
        let f = |i: usize, j: usize, k: usize| match i + j + k {
            0 => 6.0 * x2,
            1 => 6.0 * x1,
            2 => 0.0,
            _ => 8.0 * x2,
        };
        for i in 0..2 {
            for j in 0..2 {
                let expect: f64 = (0..2).map(|k| a[k] * f(i, j, k)).sum();
                assert!((b[[i, j]] - expect).abs() < 1e-7, "{i}{j}");
            }
        }
    }

    #[test]
    fn aaf_example_point() {
        let x = vec![0.3, 0.7];
        let report = verify_aaf(2, 0.0, 1.0, &[x], DEFAULT_MARGIN, DEFAULT_TOLERANCE).unwrap();
        let r = &report.reports[0];
        let h = 2.0 * (0.6f64.cosh() + 1.4f64.cosh());
        assert!((r.h.unwrap() - h).abs() < 1e-12);
        assert!(r.max_residual < 1e-8);
        assert!(report.pass);
    }

    #[test]
    fn aaf_rejects_singular_points() {
        match verify_aaf(2, 0.0, 1.0, &[vec![0.4, 0.4]], DEFAULT_MARGIN, DEFAULT_TOLERANCE) {
            Err(Error::SingularPoint { argument, .. }) => assert_eq!(argument, "x1-x2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_configs() {
        let c = PrepotentialChart::from_json(r#"{"type":"bcn","n":3,"s":0.5,"q":1.0,"margin":1e-3}"#).unwrap();
        assert_eq!(c.prepotential.dim(), 3);
        assert_eq!(c.domain.len(), 3);
        let c = PrepotentialChart::from_json(r#"{"type":"prepotential","dim":2,"F":"x1^2*x2","A":["1","0"]}"#).unwrap();
        assert_eq!(c.prepotential.dim(), 2);
        let e = PrepotentialChart::from_json(r#"{"type":"prepotential","dim":2,"F":"x1^2*x2","A":["1"]}"#).unwrap_err();
        assert!(e.to_string().contains("`A`"), "{e}");
    }
}
