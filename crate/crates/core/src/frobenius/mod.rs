//! The commutative product `X∘Y = K(X,Y)` on a tangent space: associativity,
//! unit, canonical idempotents and the two basis algorithms.
//!
//! Both basis algorithms work in the g-orthonormal frame `L^{-T}` of the
//! metric, where `K` becomes a family of symmetric matrices, and map the
//! result back to coordinates at the end.

mod opozda;
mod rigidity;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling;
use crate::tensor::{bracket, CubicTensor, KOperator};

pub use opozda::{build_constant_curvature_k, opozda_basis, DEFAULT_RESTARTS, RECONSTRUCTION_TOLERANCE};
pub use rigidity::{rigidity_diagnostics, rigidity_over_cloud, CloudRigidity, RigidityReport};

/// Bracket tolerance for treating `K` as commuting, relative to `max(1, max|K|²)`.
pub const COMMUTING_TOLERANCE: f64 = 1e-9;
/// Eigenvalues closer than this fraction of the spectral radius form a cluster.
pub const CLUSTER_GAP: f64 = 1e-8;
/// `|λ_i|` below this fraction of `max|λ|` counts as zero.
pub const DEGENERATE_EIGENVALUE: f64 = 1e-10;

const REFINEMENT_ATTEMPTS: usize = 8;

/// `X∘Y`.
pub fn product(k: &KOperator, x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<Array1<f64>> {
    let n = k.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: if x.len() != n { x.len() } else { y.len() } });
    }
    Ok(k.apply(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssociativityReport {
    /// Largest component of `(e_i∘e_j)∘e_k - e_i∘(e_j∘e_k)` over basis triples.
    pub residual: f64,
    /// Largest component of `[K,K]`.
    pub bracket_norm: f64,
    /// `|residual - bracket_norm|`; the associator is `[K,K](e_k, e_i) e_j`.
    pub discrepancy: f64,
}

/// Max over basis triples of the largest component of the associator.
pub fn associativity_residual(k: &KOperator) -> f64 {
    let n = k.dim();
    let basis: Vec<Array1<f64>> = (0..n)
        .map(|i| {
            let mut e = Array1::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let ij = k.apply(basis[i].view(), basis[j].view());
            for l in 0..n {
                let left = k.apply(ij.view(), basis[l].view());
                let jl = k.apply(basis[j].view(), basis[l].view());
                let right = k.apply(basis[i].view(), jl.view());
                worst = worst.max(linalg::max_abs((&left - &right).iter()));
            }
        }
    }
    worst
}

pub fn associativity_report(k: &KOperator) -> AssociativityReport {
    let residual = associativity_residual(k);
    let bracket_norm = bracket(k).max_norm();
    AssociativityReport { residual, bracket_norm, discrepancy: (residual - bracket_norm).abs() }
}

fn commuting_scale(k: &KOperator) -> f64 {
    let m = linalg::max_abs(k.data().iter()).max(1.0);
    m * m
}

/// Whether `max|[K,K]| ≤ tol · max(1, max|K|²)`, the test used by every
/// routine here that needs a commuting family.
pub fn bracket_within(k: &KOperator, tol: f64) -> bool {
    bracket_check(k, tol).is_ok()
}

/// Bracket norm when it is within `tol` (relative), the norm otherwise.
fn bracket_check(k: &KOperator, tol: f64) -> std::result::Result<f64, f64> {
    let norm = bracket(k).max_norm();
    if norm <= tol * commuting_scale(k) {
        Ok(norm)
    } else {
        Err(norm)
    }
}

/// An orthonormal basis together with the data of the structure in it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    pub dim: usize,
    /// Basis vectors in coordinates, one per entry; g-orthonormal.
    pub basis: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    /// Zero-filled when the basis comes from diagonalization.
    pub mu: Vec<f64>,
    /// `A_0, ..., A_n`.
    pub a: Vec<f64>,
    /// Restart that produced the maximum at each step of the sphere search.
    pub winning_restarts: Vec<usize>,
    /// Largest deviation of the cubic form in the basis from the model built
    /// from `λ, μ`.
    pub reconstruction_residual: f64,
}

impl SpectralData {
    /// Basis vectors as the columns of a matrix.
    pub fn basis_matrix(&self) -> Array2<f64> {
        let n = self.dim;
        Array2::from_shape_fn((n, n), |(r, c)| self.basis[c][r])
    }
}

/// Largest `|C(e_i, e_j, e_k) - model_ijk|` where the model has `C_iii = λ_i`,
/// `C_ijj = μ_i` for `i < j` and zeros elsewhere.
pub(crate) fn model_deviation(c: &CubicTensor, lambda: &[f64], mu: &[f64]) -> f64 {
    let n = c.dim();
    let model = model_cubic(lambda, mu);
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                worst = worst.max((c.data()[[i, j, l]] - model.data()[[i, j, l]]).abs());
            }
        }
    }
    worst
}

pub(crate) fn model_cubic(lambda: &[f64], mu: &[f64]) -> CubicTensor {
    CubicTensor::from_sorted_fn(lambda.len(), |i, j, k| {
        if i == j && j == k {
            lambda[i]
        } else if j == k {
            mu[i]
        } else {
            0.0
        }
    })
}

/// `Ĉ(v, ·, ·)` as a symmetric matrix restricted to the columns of `q`.
fn restricted_operator(c: &CubicTensor, v: ArrayView1<f64>, q: &Array2<f64>) -> Array2<f64> {
    let n = c.dim();
    let full = Array2::from_shape_fn((n, n), |(a, b)| (0..n).map(|i| c.data()[[i, a, b]] * v[i]).sum());
    linalg::symmetrize(q.t().dot(&full).dot(q).view())
}

/// Splits the span of `q` into joint eigenspaces of all `Ĉ(v, ·, ·)`.
fn refine<R: Rng>(c: &CubicTensor, q: Array2<f64>, rng: &mut R, out: &mut Vec<Array1<f64>>) -> Result<()> {
    let n = c.dim();
    let m = q.ncols();
    if m == 1 {
        out.push(q.column(0).to_owned());
        return Ok(());
    }
    let scale = linalg::max_abs(c.data().iter());
    let mut smallest_gap = f64::INFINITY;
    for _ in 0..REFINEMENT_ATTEMPTS {
        let v = sampling::unit_vector(rng, n);
        let op = restricted_operator(c, v.view(), &q);
        let (vals, vecs) = linalg::jacobi_eigen(op.view());
        let radius = linalg::max_abs(vals.iter());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let mut groups: Vec<Vec<usize>> = vec![vec![order[0]]];
        for w in order.windows(2) {
            let gap = vals[w[1]] - vals[w[0]];
            if gap < CLUSTER_GAP * radius {
                smallest_gap = smallest_gap.min(gap);
                groups.last_mut().expect("nonempty").push(w[1]);
            } else {
                groups.push(vec![w[1]]);
            }
        }
        if groups.len() > 1 {
            for g in groups {
                let sub = Array2::from_shape_fn((m, g.len()), |(r, col)| vecs[[r, g[col]]]);
                refine(c, q.dot(&sub), rng, out)?;
            }
            return Ok(());
        }
        // One cluster: either every operator is scalar on this span, or the
        // random direction was unlucky.
        let mut deviation = 0.0_f64;
        for i in 0..n {
            let mut e = Array1::<f64>::zeros(n);
            e[i] = 1.0;
            let op = restricted_operator(c, e.view(), &q);
            let mean = op.diag().sum() / m as f64;
            for r in 0..m {
                for col in 0..m {
                    let target = if r == col { mean } else { 0.0 };
                    deviation = deviation.max((op[[r, col]] - target).abs());
                }
            }
        }
        if deviation <= CLUSTER_GAP * scale.max(f64::MIN_POSITIVE) {
            out.extend(q.columns().into_iter().map(|col| col.to_owned()));
            return Ok(());
        }
    }
    Err(Error::ClusterRefinement { gap: smallest_gap })
}

/// Flips `e` so that `λ = Ĉ(e,e,e) ≥ 0`, or, when `λ` is zero, so that its
/// largest coordinate is positive.
fn orient(e: &mut Array1<f64>, lambda: &mut f64, zero: f64) {
    let flip = if lambda.abs() > zero {
        *lambda < 0.0
    } else {
        let mut best = 0;
        for i in 1..e.len() {
            if e[i].abs() > e[best].abs() + 1e-12 {
                best = i;
            }
        }
        e[best] < 0.0
    };
    if flip {
        e.mapv_inplace(|v| -v);
        *lambda = -*lambda;
    }
}

/// Descending `λ`; ties are ordered by descending lexicographic coordinates.
fn sorted_order(lambda: &[f64], basis: &[Array1<f64>], tie: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]));
    let mut out = Vec::with_capacity(order.len());
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && lambda[order[end - 1]] - lambda[order[end]] <= tie {
            end += 1;
        }
        let mut group = order[start..end].to_vec();
        group.sort_by(|&a, &b| {
            for (x, y) in basis[a].iter().zip(basis[b].iter()) {
                let c = y.total_cmp(x);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        });
        out.extend(group);
        start = end;
    }
    out
}

/// Orthonormal basis in which `K(e_i, e_i) = λ_i e_i` and `K(e_i, e_j) = 0`,
/// from a commuting family `K_X`. `tol` bounds the bracket relative to
/// `max(1, max|K|²)`.
pub fn simultaneous_diagonalize(k: &KOperator, tol: f64, seed: u64) -> Result<SpectralData> {
    let n = k.dim();
    bracket_check(k, tol).map_err(|norm| Error::NotCommuting { norm, tol })?;
    let (frame, c) = k.orthonormal_cubic()?;
    let mut rng = sampling::rng(seed);
    let mut vectors = Vec::with_capacity(n);
    refine(&c, Array2::eye(n), &mut rng, &mut vectors)?;

    let scale = linalg::max_abs(c.data().iter());
    let zero = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut coords = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    for w in &vectors {
        let mut l = c.contract(w.view(), w.view(), w.view());
        let mut e = frame.dot(w);
        orient(&mut e, &mut l, zero);
        coords.push(e);
        lambda.push(l);
    }
    let order = sorted_order(&lambda, &coords, 1e-12 * scale.max(1.0));
    let coords: Vec<Array1<f64>> = order.iter().map(|&i| coords[i].clone()).collect();
    let lambda: Vec<f64> = order.iter().map(|&i| lambda[i]).collect();

    let basis = Array2::from_shape_fn((n, n), |(r, col)| coords[col][r]);
    let in_basis = k.lower_index()?.in_frame(&basis);
    let mu = vec![0.0; n];
    let reconstruction_residual = model_deviation(&in_basis, &lambda, &mu);
    Ok(SpectralData {
        dim: n,
        basis: coords.iter().map(|e| e.to_vec()).collect(),
        lambda,
        mu,
        a: vec![0.0; n + 1],
        winning_restarts: Vec::new(),
        reconstruction_residual,
    })
}

fn degenerate_index(lambda: &[f64]) -> Option<(usize, f64)> {
    let scale = linalg::max_abs(lambda.iter());
    lambda
        .iter()
        .enumerate()
        .find(|(_, l)| scale == 0.0 || l.abs() <= DEGENERATE_EIGENVALUE * scale)
        .map(|(i, l)| (i + 1, *l))
}

/// The unit `e = Σ e_i / λ_i`, or `None` when some `λ_i` vanishes.
pub fn unit(k: &KOperator, tol: f64, seed: u64) -> Result<Option<Array1<f64>>> {
    bracket_check(k, tol).map_err(|norm| Error::NotAssociative { norm, tol })?;
    let spec = simultaneous_diagonalize(k, tol, seed)?;
    if degenerate_index(&spec.lambda).is_some() {
        return Ok(None);
    }
    let n = k.dim();
    let mut e = Array1::<f64>::zeros(n);
    for (v, l) in spec.basis.iter().zip(&spec.lambda) {
        for i in 0..n {
            e[i] += v[i] / l;
        }
    }
    Ok(Some(e))
}

/// Idempotents `u_i = e_i / λ_i` with `u_i∘u_i = u_i` and `u_i∘u_j = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdempotentFrame {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    /// `sqrt(g(u_i, u_i)) = 1/|λ_i|`.
    pub norms: Vec<f64>,
    /// Largest component of `u_i∘u_j - δ_ij u_i`.
    pub product_residual: f64,
}

impl IdempotentFrame {
    pub fn vector(&self, i: usize) -> Array1<f64> {
        Array1::from(self.vectors[i].clone())
    }
}

pub fn canonical_idempotents(k: &KOperator, tol: f64, seed: u64) -> Result<IdempotentFrame> {
    let spec = simultaneous_diagonalize(k, tol, seed)?;
    if let Some((index, value)) = degenerate_index(&spec.lambda) {
        return Err(Error::Degenerate { index, value });
    }
    let u: Vec<Array1<f64>> =
        spec.basis.iter().zip(&spec.lambda).map(|(e, l)| Array1::from(e.clone()) / *l).collect();
    let mut product_residual = 0.0_f64;
    for i in 0..u.len() {
        for j in 0..u.len() {
            let mut p = k.apply(u[i].view(), u[j].view());
            if i == j {
                p -= &u[i];
            }
            product_residual = product_residual.max(linalg::max_abs(p.iter()));
        }
    }
    Ok(IdempotentFrame {
        dim: k.dim(),
        norms: u.iter().map(|v| k.metric().norm(v.view())).collect(),
        vectors: u.iter().map(|v| v.to_vec()).collect(),
        product_residual,
    })
}
