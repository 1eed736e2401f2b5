//! Bases for `K` of constant sectional K-curvature `A`.
//!
//! `e_1` maximizes `Φ(X) = C(X,X,X)` on the unit sphere, `λ_1 = Φ(e_1)`,
//! `μ_1 = (λ_1 - sqrt(λ_1² - 4A))/2`, and the same construction is repeated
//! in the orthogonal complement of `e_1` with `A_1 = A - μ_1²`.

use ndarray::{Array1, Array2};

use super::{model_cubic, model_deviation, SpectralData};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling;
use crate::tensor::{constant_curvature_fit, raise_index, CubicTensor, KOperator, Metric};

pub const DEFAULT_RESTARTS: usize = 32;
/// Allowed deviation of the rebuilt cubic form, relative to `max(1, max|C|)`.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;

const DISCRIMINANT_TOLERANCE: f64 = 1e-12;
const STEP_CONVERGENCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 20_000;
const NEWTON_STEPS: usize = 8;

/// `μ` from the minus branch; `index` is one-based for error reporting.
fn mu_step(index: usize, lambda: f64, a_prev: f64) -> Result<f64> {
    let d = lambda * lambda - 4.0 * a_prev;
    if d < -DISCRIMINANT_TOLERANCE {
        return Err(Error::DiscriminantNegative { index, value: d });
    }
    Ok((lambda - d.max(0.0).sqrt()) / 2.0)
}

/// `K` with `g = I` and, in the coordinate basis, `K(e_i, e_i) = Σ_{j<i} μ_j e_j + λ_i e_i`
/// and `K(e_i, e_j) = μ_i e_j` for `i < j`.
pub fn build_constant_curvature_k(lambda: &[f64], a: f64) -> Result<KOperator> {
    let n = lambda.len();
    if n == 0 {
        return Err(Error::Invalid("empty λ".into()));
    }
    let mut mu = Vec::with_capacity(n);
    let mut a_prev = a;
    for (i, &l) in lambda.iter().enumerate() {
        let m = mu_step(i + 1, l, a_prev)?;
        a_prev -= m * m;
        mu.push(m);
    }
    raise_index(&model_cubic(lambda, &mu), &Metric::identity(n))
}

/// `v_k = Σ c_ijk x_i x_j`.
fn contract2(c: &CubicTensor, x: &Array1<f64>) -> Array1<f64> {
    let n = c.dim();
    let d = c.data();
    Array1::from_shape_fn(n, |k| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += d[[i, j, k]] * x[i] * x[j];
            }
        }
        s
    })
}

fn normalize(v: Array1<f64>) -> Option<Array1<f64>> {
    let norm = v.dot(&v).sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v / norm)
}

/// Shifted power iteration `x ← normalize(C(x,x,·) + σx)`.
fn power_iteration(c: &CubicTensor, start: Array1<f64>, sigma: f64) -> Array1<f64> {
    let mut x = start;
    for _ in 0..MAX_ITERATIONS {
        let next = match normalize(contract2(c, &x) + &(&x * sigma)) {
            Some(v) => v,
            None => break,
        };
        let step = linalg::max_abs((&next - &x).iter());
        x = next;
        if step < STEP_CONVERGENCE {
            break;
        }
    }
    x
}

/// Newton steps on `C(x,x,·) = λx, |x| = 1`, kept only while they reduce
/// the stationarity residual without lowering `Φ`.
fn polish(c: &CubicTensor, mut x: Array1<f64>, scale: f64) -> Array1<f64> {
    let m = x.len();
    let stationarity = |x: &Array1<f64>| {
        let v = contract2(c, x);
        let l = v.dot(x);
        (linalg::max_abs((&v - &(x * l)).iter()), l)
    };
    for _ in 0..NEWTON_STEPS {
        let (res, l) = stationarity(&x);
        if res <= 1e-15 * scale {
            break;
        }
        let v = contract2(c, &x);
        let mut jac = Array2::<f64>::zeros((m + 1, m + 1));
        let mut rhs = Array1::<f64>::zeros(m + 1);
        for a in 0..m {
            for b in 0..m {
                jac[[a, b]] = 2.0 * (0..m).map(|i| c.data()[[i, a, b]] * x[i]).sum::<f64>();
            }
            jac[[a, a]] -= l;
            jac[[a, m]] = -x[a];
            jac[[m, a]] = -x[a];
            rhs[a] = -(v[a] - l * x[a]);
        }
        rhs[m] = -(1.0 - x.dot(&x)) / 2.0;
        let dx = linalg::Lu::new(jac.view()).solve(rhs.view());
        if !dx.iter().all(|v| v.is_finite()) {
            break;
        }
        let cand = match normalize(&x + &dx.slice(ndarray::s![..m])) {
            Some(v) => v,
            None => break,
        };
        let (cres, cl) = stationarity(&cand);
        if cres < res && cl >= l - 1e-12 * scale {
            x = cand;
        } else {
            break;
        }
    }
    x
}

/// Best local maximum of `Φ` on the unit sphere of `R^m` over seeded restarts,
/// with the index of the winning restart.
fn sphere_maximum<R: rand::Rng>(
    c: &CubicTensor,
    restarts: usize,
    sigma: f64,
    scale: f64,
    rng: &mut R,
) -> (Array1<f64>, usize) {
    let m = c.dim();
    if m == 1 {
        let sign = if c.data()[[0, 0, 0]] < 0.0 { -1.0 } else { 1.0 };
        return (Array1::from(vec![sign]), 0);
    }
    let mut best: Option<(Array1<f64>, f64, usize)> = None;
    for r in 0..restarts {
        let start = sampling::unit_vector(rng, m);
        let x = polish(c, power_iteration(c, start, sigma), scale);
        let value = c.contract(x.view(), x.view(), x.view());
        if best.as_ref().is_none_or(|(_, v, _)| value > *v + 1e-12 * scale) {
            best = Some((x, value, r));
        }
    }
    let (x, _, r) = best.expect("at least one restart");
    (x, r)
}

/// Orthonormal basis and `(λ_i, μ_i, A_i)` for `K` with constant sectional
/// K-curvature `a`. Each step keeps the best of `restarts` local maxima.
pub fn opozda_basis(k: &KOperator, a: f64, restarts: usize, seed: u64) -> Result<SpectralData> {
    if restarts == 0 {
        return Err(Error::Invalid("restart budget must be positive".into()));
    }
    let n = k.dim();
    let (frame, c) = k.orthonormal_cubic()?;
    let scale = linalg::max_abs(c.data().iter()).max(1.0);

    let fit = constant_curvature_fit(k)?;
    let fit_tol = RECONSTRUCTION_TOLERANCE * scale * scale;
    if fit.residual > fit_tol || (fit.a - a).abs() > fit_tol {
        return Err(Error::Invalid(format!(
            "K does not have constant sectional K-curvature {a} (fitted {}, residual {:e})",
            fit.a, fit.residual
        )));
    }

    let sigma = match 2.0 * linalg::frobenius(c.data().iter()) {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let mut rng = sampling::rng(seed);
    let mut q = Array2::<f64>::eye(n);
    let mut vectors: Vec<Array1<f64>> = Vec::with_capacity(n);
    let (mut lambda, mut mu, mut a_seq, mut winners) = (Vec::new(), Vec::new(), vec![a], Vec::new());
    for i in 0..n {
        let reduced = c.in_frame(&q);
        let (y, restart) = sphere_maximum(&reduced, restarts, sigma, scale, &mut rng);
        let x = normalize(q.dot(&y)).expect("unit vector in the subspace");
        let l = c.contract(x.view(), x.view(), x.view());
        let a_prev = *a_seq.last().expect("A_0");
        let m = mu_step(i + 1, l, a_prev)?;
        lambda.push(l);
        mu.push(m);
        a_seq.push(a_prev - m * m);
        winners.push(restart);
        let y_col = y.clone().into_shape_with_order((y.len(), 1)).expect("column");
        q = q.dot(&linalg::orthogonal_complement(y_col.view()));
        vectors.push(x);
    }

    let e_hat = Array2::from_shape_fn((n, n), |(r, col)| vectors[col][r]);
    let reconstruction_residual = model_deviation(&c.in_frame(&e_hat), &lambda, &mu);
    if reconstruction_residual > RECONSTRUCTION_TOLERANCE * scale {
        return Err(Error::MaximizationFailed {
            restarts,
            reason: format!("rebuilt cubic form deviates by {reconstruction_residual:e}"),
        });
    }
    let basis = frame.dot(&e_hat);
    Ok(SpectralData {
        dim: n,
        basis: basis.columns().into_iter().map(|col| col.to_vec()).collect(),
        lambda,
        mu,
        a: a_seq,
        winning_restarts: winners,
        reconstruction_residual,
    })
}
