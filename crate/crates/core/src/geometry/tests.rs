use ndarray::arr1;

use super::*;
use crate::sampling::{self, point_in_box};
use crate::tensor::sectional_k_curvature;
use crate::wdvv::hessian_curvature;

fn boxed(n: usize, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    vec![[lo, hi]; n]
}

fn flat_chart() -> ChartField {
    ChartField::explicit(2, boxed(2, -1.0, 1.0), &["1", "0", "1"], &["0", "0", "0", "0"]).unwrap()
}

#[test]
fn flat_charts_have_vanishing_connection() {
    let g = levi_civita(&flat_chart(), &[0.3, -0.2]).unwrap();
    assert!(g.data().iter().all(|v| *v == 0.0));
    let h = ChartField::hessian(3, boxed(3, -1.0, 1.0), "x1^2/2 + x2^2/2 + x3^2/2").unwrap();
    let g = levi_civita(&h, &[0.3, -0.2, 0.9]).unwrap();
    assert!(g.data().iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn conformal_metric_christoffel_symbols() {
    let chart = ChartField::explicit(2, boxed(2, -1.0, 1.0), &["1", "0", "exp(2*x1)"], &["0", "0", "0", "0"]).unwrap();
    let x1 = 0.35;
    let g = levi_civita(&chart, &[x1, -0.4]).unwrap();
    let d = g.data();
    assert!((d[[1, 0, 1]] - 1.0).abs() < 1e-6);
    assert!((d[[1, 1, 0]] - 1.0).abs() < 1e-6);
    assert!((d[[0, 1, 1]] + (2.0 * x1).exp()).abs() < 1e-6);
    assert_eq!(g.torsion(), 0.0);
}

#[test]
fn conformal_metric_curvature_matches_gaussian_curvature() {
    // dx² + e^{2x} dy² has Gaussian curvature -1, so R̂_1212 = -det g.
    let chart = ChartField::explicit(2, boxed(2, -1.0, 1.0), &["1", "0", "exp(2*x1)"], &["0", "0", "0", "0"]).unwrap();
    let x = [0.2, 0.1];
    let r = curvature(&chart, &x, 0.0).unwrap();
    let det = (2.0 * x[0]).exp();
    assert!((r.lowered()[[0, 1, 0, 1]] + det).abs() < 1e-5, "{}", r.lowered()[[0, 1, 0, 1]]);
    let g = chart.evaluate(&x).unwrap().0;
    let k = r.sectional(&g, arr1(&[1.0, 0.0]).view(), arr1(&[0.3, 1.0]).view()).unwrap();
    assert!((k + 1.0).abs() < 1e-5);
}

#[test]
fn alpha_connection_properties() {
    let chart = ChartField::hessian(2, boxed(2, 0.2, 2.0), "x1^3 + x2^3 + x1*x2 + exp(x1 - x2)").unwrap();
    let x = [0.7, 1.1];
    let geo = PointGeometry::at(&chart, &x).unwrap();
    let lc = levi_civita(&chart, &x).unwrap();
    assert_eq!(geo.christoffel(0.0), lc);

    let g = chart.evaluate(&x).unwrap().0;
    let t = chart.evaluate(&x).unwrap().1.amari_chentsov();
    for alpha in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
        let first = geo.christoffel(alpha).first_kind(&g);
        let expect = t.mapv(|v| (1.0 - alpha) / 2.0 * v);
        let err = (&first - &expect).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-6, "alpha {alpha}: {err}");
        let plus = geo.christoffel(alpha).first_kind(&g);
        let minus = geo.christoffel(-alpha).first_kind(&g);
        let lc2 = lc.first_kind(&g) * 2.0;
        let err = (&(&plus + &minus) - &lc2).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12, "duality {alpha}: {err}");
    }

    let zero_c = flat_chart();
    let geo = PointGeometry::at(&zero_c, &[0.1, 0.2]).unwrap();
    for alpha in [-1.0, 0.5, 3.0] {
        assert_eq!(geo.christoffel(alpha), geo.christoffel(0.0));
    }
}

#[test]
fn hessian_curvature_cross_checks() {
    let chart = ChartField::hessian(2, boxed(2, 0.3, 2.0), "x1^3 + x2^3 + x1*x2").unwrap();
    let x = [0.8, 1.3];
    let fd = curvature(&chart, &x, 0.0).unwrap();
    let closed = hessian_curvature(&chart, &x).unwrap();
    let err = (fd.lowered() - &closed).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(err < 1e-4, "{err}");
    for alpha in [1.0, -1.0] {
        let r = curvature(&chart, &x, alpha).unwrap();
        assert!(r.mixed().iter().all(|v| v.abs() < 2e-4), "alpha {alpha}");
    }
    // R^(α) = (1 - α²)/4 g^{pq}(T_ilp T_jkq - T_ikp T_jlq) for α ∉ {±1} too.
    for alpha in [0.5, 2.0] {
        let r = curvature(&chart, &x, alpha).unwrap();
        let expect = &closed * (1.0 - alpha * alpha);
        let err = (r.lowered() - &expect).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-4, "alpha {alpha}: {err}");
    }
}

#[test]
fn hessian_sectional_curvatures_are_opposite() {
    let chart = ChartField::hessian(3, boxed(3, 0.5, 1.2), "4*(x1^4 + x2^4 + x3^4) + x1^2*x2 + x2*x3^2 + x1*x2*x3").unwrap();
    let mut rng = sampling::rng(11);
    for _ in 0..5 {
        let x = point_in_box(&mut rng, chart.domain());
        let geo = PointGeometry::at(&chart, &x).unwrap();
        let r_hat = geo.curvature(0.0);
        let k = geo.k_operator().unwrap();
        for scale in [1.0, 0.4] {
            let ks = k.scaled(scale);
            for _ in 0..4 {
                let u = sampling::gaussian_vector(&mut rng, 3);
                let v = sampling::gaussian_vector(&mut rng, 3);
                let kk = sectional_k_curvature(&ks, u.view(), v.view()).unwrap();
                let kh = r_hat.sectional(geo.metric(), u.view(), v.view()).unwrap();
                assert!((kk + scale * scale * kh).abs() < 1e-4 * kh.abs().max(1.0), "{kk} vs {kh}");
            }
        }
    }
}

#[test]
fn identity_suite_on_zero_cubic() {
    let chart = ChartField::explicit(
        2,
        boxed(2, -1.0, 1.0),
        &["2 + x1^2", "0.1*x1*x2", "1 + cosh(x2)"],
        &["0", "0", "0", "0"],
    )
    .unwrap();
    let rep = identity_suite(&chart, &[0.3, -0.6]).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.max_residual() < 1e-10);
}

#[test]
fn identity_suite_on_random_polynomial_charts() {
    let mut rng = sampling::rng(5);
    for n in [2, 3] {
        for _ in 0..3 {
            let chart = sampling::random_polynomial_chart(&mut rng, n);
            for _ in 0..4 {
                let x = point_in_box(&mut rng, chart.domain());
                let rep = identity_suite(&chart, &x).unwrap();
                assert!(rep.pass && rep.max_residual() < 1e-4, "{rep:?}");
                assert!(rep.metric_compatibility < 1e-10);
            }
        }
    }
}

#[test]
fn hessian_gauss_equation_reduces() {
    let chart = ChartField::hessian(2, boxed(2, 0.3, 2.0), "x1^3 + x2^3 + x1*x2 + x1^2*x2").unwrap();
    let x = [0.9, 0.6];
    let geo = PointGeometry::at(&chart, &x).unwrap();
    let rep = geo.identity_report().unwrap();
    assert!(rep.pass, "{rep:?}");
    // With R = R̄ = 0 the Gauss equation is 2R̂ = -2[K,K].
    let kk = bracket(&geo.k_operator().unwrap());
    let sum = geo.curvature(0.0).mixed() + kk.mixed();
    let scale = linalg::frobenius(kk.mixed().iter()).max(1.0);
    assert!(sum.iter().all(|v| v.abs() / scale < 1e-4));
}

#[test]
fn covariant_derivative_of_cubic() {
    let flat = flat_chart();
    let nc = covariant_derivative_c(&flat, &[0.1, 0.5]).unwrap();
    assert!(nc.data.iter().all(|v| *v == 0.0));

    let h = ChartField::hessian(2, boxed(2, 0.3, 2.0), "x1^3 + x1*x2^2 + 0.5*x2^4 + x1^2*x2").unwrap();
    let nc = covariant_derivative_c(&h, &[0.9, 0.7]).unwrap();
    assert!(nc.relative_asymmetry < 1e-4, "{}", nc.relative_asymmetry);

    // g = I, C_111 = x2: (∇̂_2 C)_111 = 1 while (∇̂_1 C)_211 = 0.
    let bad = ChartField::explicit(2, boxed(2, -1.0, 1.0), &["1", "0", "1"], &["x2", "0", "0", "0"]).unwrap();
    let nc = covariant_derivative_c(&bad, &[0.2, 0.4]).unwrap();
    assert!((nc.asymmetry - 1.0).abs() < 1e-8, "{}", nc.asymmetry);
}

#[test]
fn trace_field_examples() {
    let (e, ne) = trace_field_e(&flat_chart(), &[0.0, 0.0]).unwrap();
    assert!(e.iter().chain(ne.iter()).all(|v| *v == 0.0));

    let iso = ChartField::isothermal2d(boxed(2, -1.0, 1.0), "1", ["1", "0", "2", "0"]).unwrap();
    let (e, ne) = trace_field_e(&iso, &[0.4, -0.3]).unwrap();
    assert_eq!(e.to_vec(), vec![3.0, 0.0]);
    assert!(ne.iter().all(|v| *v == 0.0));

    // Constant K with diagonal cubic form in an orthonormal basis and g = I.
    let lambda = [1.5, -0.5, 2.0];
    let basis = sampling::random_rotation(&mut sampling::rng(2), 3);
    let c = sampling::diagonal_cubic_in_basis(&lambda, &basis);
    let entries: Vec<String> = crate::fields::upper_triples(3).iter().map(|&[i, j, k]| format!("{:?}", c.data()[[i, j, k]])).collect();
    let refs: Vec<&str> = entries.iter().map(String::as_str).collect();
    let chart = ChartField::explicit(3, boxed(3, -1.0, 1.0), &["1", "0", "0", "1", "0", "1"], &refs).unwrap();
    let (e, ne) = trace_field_e(&chart, &[0.1, 0.2, 0.3]).unwrap();
    let expect = basis.dot(&arr1(&lambda));
    assert!((&e - &expect).iter().all(|v| v.abs() < 1e-12));
    assert!(ne.iter().all(|v| *v == 0.0));
}

#[test]
fn curvature_is_antisymmetric() {
    let mut rng = sampling::rng(8);
    let chart = sampling::random_polynomial_chart(&mut rng, 3);
    let x = point_in_box(&mut rng, chart.domain());
    for alpha in [0.0, 1.0, -0.7] {
        assert!(curvature(&chart, &x, alpha).unwrap().antisymmetry_residual() < 1e-5);
    }
}
