//! Seeded random draws used by the randomized algorithms, the CLI samplers and
//! the test suites.

use ndarray::{Array1, Array2, Array3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg;
use crate::tensor::{CubicTensor, Metric};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.sample(StandardNormal))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Array1<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.dot(&v).sqrt();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Array2<f64> {
    let a = Array2::from_shape_fn((n, n), |_| rng.sample::<f64, _>(StandardNormal));
    let mut q = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut v = a.column(j).to_owned();
        for _ in 0..2 {
            for k in 0..j {
                let d = v.dot(&q.column(k));
                v.scaled_add(-d, &q.column(k));
            }
        }
        let norm = v.dot(&v).sqrt();
        q.column_mut(j).assign(&(v / norm));
    }
    q
}

/// SPD metric with eigenvalues in `[0.5, 2.5]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Metric {
    let q = random_rotation(rng, n);
    let d = Array1::from_shape_fn(n, |_| rng.random_range(0.5..2.5));
    let g = q.dot(&Array2::from_diag(&d)).dot(&q.t());
    Metric::new(linalg::symmetrize(g.view())).expect("constructed SPD")
}

/// Totally symmetric cubic with entries uniform in `[-scale, scale]`.
pub fn random_cubic<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CubicTensor {
    CubicTensor::from_sorted_fn(n, |_, _, _| rng.random_range(-scale..scale))
}

/// Cubic tensor `C(X,Y,Z) = Σ λ_i <e_i,X><e_i,Y><e_i,Z>` for the columns `e_i`
/// of `basis` (coordinates w.r.t. the identity metric).
pub fn diagonal_cubic_in_basis(lambda: &[f64], basis: &Array2<f64>) -> CubicTensor {
    let n = basis.nrows();
    let mut t = Array3::<f64>::zeros((n, n, n));
    for (a, &l) in lambda.iter().enumerate() {
        let e = basis.column(a);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t[[i, j, k]] += l * e[i] * e[j] * e[k];
                }
            }
        }
    }
    CubicTensor::from_sorted_fn(n, |i, j, k| t[[i, j, k]])
}

/// Uniform point in an axis-aligned box.
pub fn point_in_box<R: Rng + ?Sized>(rng: &mut R, domain: &[[f64; 2]]) -> Vec<f64> {
    domain
        .iter()
        .map(|[lo, hi]| if hi > lo { rng.random_range(*lo..*hi) } else { *lo })
        .collect()
}

fn random_quadratic<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> String {
    let mut terms = vec![format!("{:?}", scale * rng.random_range(-1.0..1.0))];
    for i in 0..n {
        terms.push(format!("{:?}*x{}", scale * rng.random_range(-1.0..1.0), i + 1));
        for j in i..n {
            terms.push(format!("{:?}*x{}*x{}", scale * rng.random_range(-1.0..1.0), i + 1, j + 1));
        }
    }
    terms.join(" + ")
}

/// Explicit chart on `[-0.5, 0.5]^n` whose metric and cubic entries are
/// random quadratic polynomials. The metric is diagonally dominant on the
/// box, hence positive definite there.
pub fn random_polynomial_chart<R: Rng + ?Sized>(rng: &mut R, n: usize) -> crate::fields::ChartField {
    let mut g = Vec::new();
    for [i, j] in crate::fields::upper_pairs(n) {
        let poly = random_quadratic(rng, n, 0.3 / n as f64);
        g.push(if i == j { format!("3 + {poly}") } else { poly });
    }
    let c: Vec<String> = crate::fields::upper_triples(n).iter().map(|_| random_quadratic(rng, n, 1.0)).collect();
    let g: Vec<&str> = g.iter().map(String::as_str).collect();
    let c: Vec<&str> = c.iter().map(String::as_str).collect();
    crate::fields::ChartField::explicit(n, vec![[-0.5, 0.5]; n], &g, &c).expect("well-formed polynomial chart")
}

/// `count` uniform points of the box that satisfy `accept`, by rejection.
/// Gives up after `1000 * count` draws.
pub fn accepted_points<R, F>(rng: &mut R, domain: &[[f64; 2]], count: usize, accept: F) -> crate::Result<Vec<Vec<f64>>>
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> bool,
{
    let mut out = Vec::with_capacity(count);
    let mut draws = 0usize;
    while out.len() < count {
        if draws >= 1000 * count.max(1) {
            return Err(crate::Error::Invalid(format!(
                "only {} of {count} sampled points were admissible after {draws} draws",
                out.len()
            )));
        }
        draws += 1;
        let x = point_in_box(rng, domain);
        if accept(&x) {
            out.push(x);
        }
    }
    Ok(out)
}
