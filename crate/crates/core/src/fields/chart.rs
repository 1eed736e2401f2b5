//! Charts: a box in R^n carrying a metric field `g` and a cubic field `C`.

use std::collections::HashMap;

use ndarray::{Array2, Array3, Array4};
use serde::Deserialize;

use super::expr::ScalarExpr;
use super::fd::{partial, FdPolicy};
use super::fisher;
use crate::error::{Error, Result};
use crate::tensor::{CubicTensor, Metric};
use crate::wdvv::BcnParams;

/// How a chart produces `g` and `C`.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartKind {
    /// Expression for every entry; `g` is n×n, `c` is n×n×n (row-major), both
    /// completed symmetrically from upper-triangular input.
    Explicit { g: Vec<ScalarExpr>, c: Vec<ScalarExpr> },
    /// `g = Hess φ`, `C = -½ ∂³φ`.
    Hessian { potential: ScalarExpr },
    /// `g = φ (dx² + dy²)`, `C_111 = f1, C_112 = f2, C_122 = f3, C_222 = f4`.
    Isothermal2d { conformal: ScalarExpr, f: [ScalarExpr; 4] },
    /// `g = B = Σ_k sinh(2x_k) F_ijk`, `C = F_ijk` for the BC_n prepotential.
    Bcn(BcnParams),
    /// Finite sample space with log-probabilities `ℓ_x(θ)`; `g` is the Fisher
    /// metric and `C = -½ T` with `T_ijk = Σ p ∂_iℓ ∂_jℓ ∂_kℓ`.
    FiniteFamily { log_probs: Vec<ScalarExpr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartField {
    dim: usize,
    domain: Vec<[f64; 2]>,
    kind: ChartKind,
    fd: FdPolicy,
}

/// Value and derivatives of `g` and `C` at a point.
///
/// `dg[[l, i, j]] = ∂_l g_ij`, `ddg[[l, m, i, j]] = ∂_l ∂_m g_ij`,
/// `dc[[l, i, j, k]] = ∂_l C_ijk`.
#[derive(Debug, Clone)]
pub struct ChartJet {
    pub point: Vec<f64>,
    pub metric: Metric,
    pub cubic: CubicTensor,
    pub dg: Array3<f64>,
    pub ddg: Array4<f64>,
    pub dc: Array4<f64>,
    /// True when no derivative was nested through finite differences twice,
    /// i.e. the curvature is as accurate as a single FD pass.
    pub closed_path: bool,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ChartConfig {
    Explicit {
        dim: usize,
        domain: Vec<[f64; 2]>,
        g: Vec<String>,
        #[serde(rename = "C")]
        c: Vec<String>,
        #[serde(default)]
        fd: FdPolicy,
    },
    Hessian {
        dim: usize,
        domain: Vec<[f64; 2]>,
        potential: String,
        #[serde(default)]
        fd: FdPolicy,
    },
    #[serde(rename = "isothermal2d")]
    Isothermal2d {
        #[serde(default = "two")]
        dim: usize,
        domain: Vec<[f64; 2]>,
        conformal: String,
        f: Vec<String>,
        #[serde(default)]
        fd: FdPolicy,
    },
    Bcn {
        n: usize,
        s: f64,
        q: f64,
        #[serde(default)]
        r: Option<f64>,
        domain: Vec<[f64; 2]>,
        #[serde(default)]
        fd: FdPolicy,
    },
    FiniteFamily {
        dim: usize,
        domain: Vec<[f64; 2]>,
        log_probs: Vec<String>,
        #[serde(default)]
        fd: FdPolicy,
    },
}

fn two() -> usize {
    2
}

fn parse_field(text: &str, dim: usize, field: String) -> Result<ScalarExpr> {
    ScalarExpr::parse(text, dim).map_err(|e| e.in_field(field))
}

/// Upper-triangular index tuples `i ≤ j` in row-major order.
pub fn upper_pairs(n: usize) -> Vec<[usize; 2]> {
    (0..n).flat_map(|i| (i..n).map(move |j| [i, j])).collect()
}

/// Sorted index triples `i ≤ j ≤ k` in lexicographic order.
pub fn upper_triples(n: usize) -> Vec<[usize; 3]> {
    (0..n).flat_map(|i| (i..n).flat_map(move |j| (j..n).map(move |k| [i, j, k]))).collect()
}

impl ChartField {
    pub fn new(dim: usize, domain: Vec<[f64; 2]>, kind: ChartKind, fd: FdPolicy) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("chart dimension must be positive".into()));
        }
        fd.validate().map_err(|e| e.in_field("fd"))?;
        if domain.len() != dim {
            return Err(Error::Invalid(format!("domain has {} intervals for dimension {dim}", domain.len()))
                .in_field("domain"));
        }
        for (i, [lo, hi]) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Invalid(format!("interval [{lo}, {hi}] is not a finite box side"))
                    .in_field(format!("domain[{i}]")));
            }
        }
        let check = |len: usize, want: usize, field: &str| {
            if len != want {
                Err(Error::Invalid(format!("expected {want} entries, got {len}")).in_field(field))
            } else {
                Ok(())
            }
        };
        match &kind {
            ChartKind::Explicit { g, c } => {
                check(g.len(), dim * dim, "g")?;
                check(c.len(), dim * dim * dim, "C")?;
            }
            ChartKind::Isothermal2d { .. } => check(dim, 2, "dim")?,
            ChartKind::Bcn(p) => check(dim, p.n, "n")?,
            ChartKind::FiniteFamily { log_probs } => {
                if log_probs.is_empty() {
                    return Err(Error::Invalid("need at least one outcome".into()).in_field("log_probs"));
                }
            }
            ChartKind::Hessian { .. } => {}
        }
        Ok(ChartField { dim, domain, kind, fd })
    }

    /// Explicit chart from upper-triangular expression lists: `g` in the
    /// order of [`upper_pairs`], `C` in the order of [`upper_triples`].
    pub fn explicit(dim: usize, domain: Vec<[f64; 2]>, g: &[&str], c: &[&str]) -> Result<Self> {
        let g: Vec<String> = g.iter().map(|s| s.to_string()).collect();
        let c: Vec<String> = c.iter().map(|s| s.to_string()).collect();
        Self::explicit_from_strings(dim, domain, &g, &c, FdPolicy::default())
    }

    fn explicit_from_strings(dim: usize, domain: Vec<[f64; 2]>, g: &[String], c: &[String], fd: FdPolicy) -> Result<Self> {
        let pairs = upper_pairs(dim);
        let triples = upper_triples(dim);
        if g.len() != pairs.len() {
            return Err(Error::Invalid(format!("expected {} upper-triangular entries, got {}", pairs.len(), g.len()))
                .in_field("g"));
        }
        if c.len() != triples.len() {
            return Err(Error::Invalid(format!("expected {} sorted entries, got {}", triples.len(), c.len()))
                .in_field("C"));
        }
        let zero = ScalarExpr::constant(0.0, dim);
        let mut gm = vec![zero.clone(); dim * dim];
        for (t, [i, j]) in g.iter().zip(&pairs) {
            let e = parse_field(t, dim, format!("g[{i}][{j}]"))?;
            gm[i * dim + j] = e.clone();
            gm[j * dim + i] = e;
        }
        let mut cm = vec![zero; dim * dim * dim];
        for (t, &[i, j, k]) in c.iter().zip(&triples) {
            let e = parse_field(t, dim, format!("C[{i}][{j}][{k}]"))?;
            for [a, b, d] in crate::tensor::permutations_of([i, j, k]) {
                cm[(a * dim + b) * dim + d] = e.clone();
            }
        }
        Self::new(dim, domain, ChartKind::Explicit { g: gm, c: cm }, fd)
    }

    pub fn hessian(dim: usize, domain: Vec<[f64; 2]>, potential: &str) -> Result<Self> {
        let potential = parse_field(potential, dim, "potential".into())?;
        Self::new(dim, domain, ChartKind::Hessian { potential }, FdPolicy::default())
    }

    pub fn isothermal2d(domain: Vec<[f64; 2]>, conformal: &str, f: [&str; 4]) -> Result<Self> {
        let conformal = parse_field(conformal, 2, "conformal".into())?;
        let mut fs = Vec::with_capacity(4);
        for (i, t) in f.iter().enumerate() {
            fs.push(parse_field(t, 2, format!("f[{i}]"))?);
        }
        let f: [ScalarExpr; 4] = fs.try_into().expect("four entries");
        Self::new(2, domain, ChartKind::Isothermal2d { conformal, f }, FdPolicy::default())
    }

    pub fn bcn(params: BcnParams, domain: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(params.n, domain, ChartKind::Bcn(params), FdPolicy::default())
    }

    pub fn finite_family(dim: usize, domain: Vec<[f64; 2]>, log_probs: &[&str]) -> Result<Self> {
        let mut ls = Vec::with_capacity(log_probs.len());
        for (i, t) in log_probs.iter().enumerate() {
            ls.push(parse_field(t, dim, format!("log_probs[{i}]"))?);
        }
        Self::new(dim, domain, ChartKind::FiniteFamily { log_probs: ls }, FdPolicy::default())
    }

    /// Parses the JSON chart schema.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ChartConfig =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("chart JSON: {e}")))?;
        match config {
            ChartConfig::Explicit { dim, domain, g, c, fd } => Self::explicit_from_strings(dim, domain, &g, &c, fd),
            ChartConfig::Hessian { dim, domain, potential, fd } => {
                Self::hessian(dim, domain, &potential).map(|c| c.with_fd(fd))?
            }
            ChartConfig::Isothermal2d { dim, domain, conformal, f, fd } => {
                if dim != 2 {
                    return Err(Error::Invalid("isothermal charts are two-dimensional".into()).in_field("dim"));
                }
                if f.len() != 4 {
                    return Err(Error::Invalid(format!("expected 4 entries, got {}", f.len())).in_field("f"));
                }
                Self::isothermal2d(domain, &conformal, [&f[0], &f[1], &f[2], &f[3]]).map(|c| c.with_fd(fd))?
            }
            ChartConfig::Bcn { n, s, q, r, domain, fd } => {
                let params = match r {
                    Some(r) => BcnParams::with_r(n, s, q, r),
                    None => BcnParams::new(n, s, q),
                }?;
                Self::bcn(params, domain).map(|c| c.with_fd(fd))?
            }
            ChartConfig::FiniteFamily { dim, domain, log_probs, fd } => {
                let refs: Vec<&str> = log_probs.iter().map(String::as_str).collect();
                Self::finite_family(dim, domain, &refs).map(|c| c.with_fd(fd))?
            }
        }
    }

    pub fn with_fd(mut self, fd: FdPolicy) -> Result<Self> {
        fd.validate().map_err(|e| e.in_field("fd"))?;
        self.fd = fd;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: Vec<[f64; 2]>) -> Result<Self> {
        self.domain = domain;
        Self::new(self.dim, self.domain, self.kind, self.fd)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[[f64; 2]] {
        &self.domain
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn fd(&self) -> &FdPolicy {
        &self.fd
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ChartKind::Explicit { .. } => "explicit",
            ChartKind::Hessian { .. } => "hessian",
            ChartKind::Isothermal2d { .. } => "isothermal2d",
            ChartKind::Bcn(_) => "bcn",
            ChartKind::FiniteFamily { .. } => "finite_family",
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().zip(&self.domain).all(|(v, [lo, hi])| lo <= v && v <= hi)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("point {x:?} is not finite")));
        }
        Ok(())
    }

    fn metric_at(&self, g: Array2<f64>, x: &[f64]) -> Result<Metric> {
        match Metric::new(g) {
            Ok(m) => Ok(m),
            Err(Error::NotPositiveDefinite { .. }) => Err(Error::NotSpdAtPoint { point: x.to_vec() }),
            Err(e) => Err(e),
        }
    }

    /// `g` and `C` at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<(Metric, CubicTensor)> {
        self.check_point(x)?;
        let n = self.dim;
        match &self.kind {
            ChartKind::Explicit { g, c } => {
                let gm = Array2::from_shape_vec((n, n), g.iter().map(|e| e.eval(x)).collect::<Result<_>>()?)
                    .expect("shape");
                let cm = Array3::from_shape_vec((n, n, n), c.iter().map(|e| e.eval(x)).collect::<Result<_>>()?)
                    .expect("shape");
                Ok((self.metric_at(gm, x)?, CubicTensor::new(cm)?))
            }
            ChartKind::Hessian { potential } => {
                let mut d = Derivatives::new(|p: &[f64]| potential.eval(p), x, self.fd);
                let g = Array2::from_shape_fn((n, n), |(i, j)| d.get(&[i, j]));
                let c = Array3::from_shape_fn((n, n, n), |(i, j, k)| -0.5 * d.get(&[i, j, k]));
                d.finish()?;
                Ok((self.metric_at(g, x)?, CubicTensor::new(c)?))
            }
            ChartKind::Isothermal2d { conformal, f } => {
                let phi = conformal.eval(x)?;
                let fv: Vec<f64> = f.iter().map(|e| e.eval(x)).collect::<Result<_>>()?;
                let g = Array2::from_diag_elem(2, phi);
                Ok((self.metric_at(g, x)?, isothermal_cubic(&fv)))
            }
            ChartKind::Bcn(p) => {
                let t = p.third_derivatives(x)?;
                let b = p.b_matrix(x)?;
                Ok((self.metric_at(b, x)?, CubicTensor::new(t)?))
            }
            ChartKind::FiniteFamily { log_probs } => {
                let (g, t) = fisher::fisher_scores(log_probs, x, &self.fd)?;
                Ok((g, CubicTensor::from_amari_chentsov(t)?))
            }
        }
    }

    /// Value and first and second derivatives of `g`, value and first
    /// derivatives of `C`.
    pub fn jet(&self, x: &[f64]) -> Result<ChartJet> {
        self.check_point(x)?;
        let n = self.dim;
        let (metric, cubic) = self.evaluate(x)?;
        let mut dg = Array3::<f64>::zeros((n, n, n));
        let mut ddg = Array4::<f64>::zeros((n, n, n, n));
        let mut dc = Array4::<f64>::zeros((n, n, n, n));
        let mut closed_path = false;
        match &self.kind {
            ChartKind::Explicit { g, c } => {
                for [i, j] in upper_pairs(n) {
                    let e = &g[i * n + j];
                    let mut d = Derivatives::new(|p: &[f64]| e.eval(p), x, self.fd);
                    for l in 0..n {
                        let v = d.get(&[l]);
                        dg[[l, i, j]] = v;
                        dg[[l, j, i]] = v;
                        for m in 0..n {
                            let v = d.get(&[l, m]);
                            ddg[[l, m, i, j]] = v;
                            ddg[[l, m, j, i]] = v;
                        }
                    }
                    d.finish()?;
                }
                for [i, j, k] in upper_triples(n) {
                    let e = &c[(i * n + j) * n + k];
                    let mut d = Derivatives::new(|p: &[f64]| e.eval(p), x, self.fd);
                    for l in 0..n {
                        let v = d.get(&[l]);
                        for [a, b, cc] in crate::tensor::permutations_of([i, j, k]) {
                            dc[[l, a, b, cc]] = v;
                        }
                    }
                    d.finish()?;
                }
            }
            ChartKind::Hessian { potential } => {
                closed_path = true;
                let mut d = Derivatives::new(|p: &[f64]| potential.eval(p), x, self.fd);
                for l in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            dg[[l, i, j]] = d.get(&[l, i, j]);
                            for k in 0..n {
                                dc[[l, i, j, k]] = -0.5 * d.get(&[l, i, j, k]);
                            }
                            for m in 0..n {
                                ddg[[l, m, i, j]] = d.get(&[l, m, i, j]);
                            }
                        }
                    }
                }
                d.finish()?;
            }
            ChartKind::Isothermal2d { conformal, f } => {
                let mut d = Derivatives::new(|p: &[f64]| conformal.eval(p), x, self.fd);
                for l in 0..2 {
                    for i in 0..2 {
                        dg[[l, i, i]] = d.get(&[l]);
                        for m in 0..2 {
                            ddg[[l, m, i, i]] = d.get(&[l, m]);
                        }
                    }
                }
                d.finish()?;
                let mut df = [[0.0; 4]; 2];
                for (a, e) in f.iter().enumerate() {
                    let mut d = Derivatives::new(|p: &[f64]| e.eval(p), x, self.fd);
                    for (l, row) in df.iter_mut().enumerate() {
                        row[a] = d.get(&[l]);
                    }
                    d.finish()?;
                }
                for l in 0..2 {
                    let c = isothermal_cubic(&df[l]);
                    dc.index_axis_mut(ndarray::Axis(0), l).assign(c.data());
                }
            }
            ChartKind::Bcn(p) => {
                for [i, j] in upper_pairs(n) {
                    let f = |y: &[f64]| Ok(p.b_matrix(y)?[[i, j]]);
                    let mut d = Derivatives::new(f, x, self.fd);
                    for l in 0..n {
                        let v = d.get(&[l]);
                        dg[[l, i, j]] = v;
                        dg[[l, j, i]] = v;
                        for m in 0..n {
                            let v = d.get(&[l, m]);
                            ddg[[l, m, i, j]] = v;
                            ddg[[l, m, j, i]] = v;
                        }
                    }
                    d.finish()?;
                }
                for [i, j, k] in upper_triples(n) {
                    let f = |y: &[f64]| Ok(p.third_derivatives(y)?[[i, j, k]]);
                    let mut d = Derivatives::new(f, x, self.fd);
                    for l in 0..n {
                        let v = d.get(&[l]);
                        for [a, b, c] in crate::tensor::permutations_of([i, j, k]) {
                            dc[[l, a, b, c]] = v;
                        }
                    }
                    d.finish()?;
                }
            }
            ChartKind::FiniteFamily { log_probs } => {
                closed_path = true;
                let fj = fisher::fisher_jet(log_probs, x, &self.fd)?;
                dg = fj.dg;
                ddg = fj.ddg;
                dc = fj.dt.mapv(|v| -0.5 * v);
            }
        }
        Ok(ChartJet { point: x.to_vec(), metric, cubic, dg, ddg, dc, closed_path })
    }
}

/// Cubic tensor of an isothermal chart from `(f1, f2, f3, f4)`.
fn isothermal_cubic(f: &[f64]) -> CubicTensor {
    CubicTensor::from_sorted_fn(2, |i, j, k| f[i + j + k])
}

/// Memoized partial derivatives of one scalar function at one point, keyed by
/// the sorted multi-index so that mixed partials are exactly symmetric.
/// The first error is kept and reported by [`Derivatives::finish`].
pub(crate) struct Derivatives<F> {
    f: F,
    x: Vec<f64>,
    policy: FdPolicy,
    cache: HashMap<Vec<usize>, f64>,
    error: Option<Error>,
}

impl<F: Fn(&[f64]) -> Result<f64>> Derivatives<F> {
    pub(crate) fn new(f: F, x: &[f64], policy: FdPolicy) -> Self {
        Derivatives { f, x: x.to_vec(), policy, cache: HashMap::new(), error: None }
    }

    pub(crate) fn get(&mut self, multi_index: &[usize]) -> f64 {
        let mut key = multi_index.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let v = match partial(&self.f, &self.x, &key, &self.policy) {
            Ok(v) => v,
            Err(e) => {
                self.error.get_or_insert(e);
                f64::NAN
            }
        };
        self.cache.insert(key, v);
        v
    }

    pub(crate) fn finish(self) -> Result<()> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
