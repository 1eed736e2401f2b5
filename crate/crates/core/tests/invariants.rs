use ndarray::{Array1, Array2};
use proptest::prelude::*;
use statgeo_core::sampling::{self, random_rotation};
use statgeo_core::tensor::{bracket, raise_index, sectional_k_curvature, yukawa_term};
use statgeo_core::wdvv::{verify_aaf, DEFAULT_MARGIN, DEFAULT_TOLERANCE};
use statgeo_core::{BcnParams, CubicTensor, KOperator, Metric, ScalarExpr};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x1a7e),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_k(seed: u64, n: usize) -> KOperator {
    let mut rng = sampling::rng(seed);
    let g = sampling::random_spd(&mut rng, n);
    raise_index(&sampling::random_cubic(&mut rng, n, 1.0), &g).unwrap()
}

/// Change of coordinates by `p`: `g → pᵀ g p`, `C → C(p·, p·, p·)`.
fn transformed(k: &KOperator, p: &Array2<f64>) -> KOperator {
    let g = Metric::new(p.t().dot(k.metric().matrix()).dot(p)).unwrap();
    let c = k.lower_index().unwrap().in_frame(p);
    raise_index(&c, &g).unwrap()
}

fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1usize..=3).prop_map(|i| format!("x{i}")),
        (-5.0f64..5.0).prop_map(|v| format!("{v:?}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*"]))
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.clone().prop_map(|a| format!("exp(0.1*({a}))")),
            inner.prop_map(|a| format!("-({a})^2")),
        ]
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bracket_symmetries_hold(seed in any::<u64>(), n in 2usize..6) {
        let r = bracket(&random_k(seed, n)).symmetry_residuals();
        prop_assert!(r.max() < 1e-12, "{r:?}");
    }

    #[test]
    fn sectional_curvature_depends_only_on_the_plane(
        seed in any::<u64>(),
        n in 2usize..5,
        m in prop::array::uniform4(-2.0f64..2.0),
        t in 0.1f64..3.0,
    ) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.1);
        let k = random_k(seed, n);
        let mut rng = sampling::rng(seed ^ 0xabc);
        let x = sampling::gaussian_vector(&mut rng, n);
        let y = sampling::gaussian_vector(&mut rng, n);
        let base = sectional_k_curvature(&k, x.view(), y.view()).unwrap();
        let u = &x * m[0] + &(&y * m[1]);
        let v = &x * m[2] + &(&y * m[3]);
        let other = sectional_k_curvature(&k, u.view(), v.view()).unwrap();
        prop_assert!((base - other).abs() < 1e-9 * base.abs().max(1.0));
        let scaled = sectional_k_curvature(&k.scaled(t), x.view(), y.view()).unwrap();
        prop_assert!((scaled - t * t * base).abs() < 1e-9 * (t * t * base).abs().max(1.0));
    }

    #[test]
    fn bracket_and_yukawa_are_coordinate_invariant(seed in any::<u64>(), n in 2usize..5) {
        let k = random_k(seed, n);
        let mut rng = sampling::rng(seed.wrapping_add(1));
        // invertible change of basis: rotation times positive diagonal
        let d = Array1::from_shape_fn(n, |i| 0.5 + 0.3 * i as f64);
        let p = random_rotation(&mut rng, n).dot(&Array2::from_diag(&d));
        let kp = transformed(&k, &p);
        let y = yukawa_term(&k.lower_index().unwrap(), k.metric()).unwrap();
        let yp = yukawa_term(&kp.lower_index().unwrap(), kp.metric()).unwrap();
        prop_assert!((y - yp).abs() < 1e-9 * y.abs().max(1.0));
        // [K,K](pX, pY)pZ = p [K',K'](X,Y)Z
        let x = sampling::gaussian_vector(&mut rng, n);
        let yv = sampling::gaussian_vector(&mut rng, n);
        let z = sampling::gaussian_vector(&mut rng, n);
        let lhs = bracket(&k).apply(p.dot(&x).view(), p.dot(&yv).view(), p.dot(&z).view());
        let rhs = p.dot(&bracket(&kp).apply(x.view(), yv.view(), z.view()));
        let scale = lhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        prop_assert!((&lhs - &rhs).iter().all(|v| v.abs() < 1e-9 * scale));
    }

    #[test]
    fn printed_expressions_reparse_to_the_same_function(
        text in expr_strategy(),
        x in prop::array::uniform3(-1.5f64..1.5),
    ) {
        let e = ScalarExpr::parse(&text, 3).unwrap();
        let printed = e.to_string();
        let again = ScalarExpr::parse(&printed, 3).unwrap();
        let (a, b) = (e.eval(&x).unwrap(), again.eval(&x).unwrap());
        prop_assert!(a == b || (a - b).abs() <= 1e-12 * a.abs().max(1.0), "{text} -> {printed}: {a} vs {b}");
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn bcn_on_the_constraint_satisfies_wdvv(
        n in 2usize..5,
        s in -1.0f64..1.0,
        q in prop::sample::select(vec![-1.0, -0.5, 0.5, 1.0]),
        seed in any::<u64>(),
    ) {
        let params = BcnParams::new(n, s, q).unwrap();
        let mut rng = sampling::rng(seed);
        let points = sampling::accepted_points(&mut rng, &vec![[-1.2, 1.2]; n], 3, |x| {
            params.check_generic(x, 0.05).is_ok()
        })
        .unwrap();
        let report = verify_aaf(n, s, q, &points, DEFAULT_MARGIN, DEFAULT_TOLERANCE).unwrap();
        prop_assert!(report.pass, "{:?}", report.reports.iter().map(|r| r.max_residual).collect::<Vec<_>>());
    }

    #[test]
    fn commuting_structures_have_vanishing_yukawa(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = sampling::rng(seed);
        let lambda: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 * 0.7).collect();
        let c = sampling::diagonal_cubic_in_basis(&lambda, &random_rotation(&mut rng, n));
        let k = raise_index(&c, &Metric::identity(n)).unwrap();
        prop_assert!(bracket(&k).max_norm() < 1e-12);
        prop_assert!(yukawa_term(&c, k.metric()).unwrap().abs() < 1e-10);
    }
}

#[test]
fn cubic_in_frame_matches_contraction() {
    let mut rng = sampling::rng(3);
    let c = sampling::random_cubic(&mut rng, 3, 1.0);
    let p = random_rotation(&mut rng, 3);
    let cp: CubicTensor = c.in_frame(&p);
    let (a, b, d) = (p.column(0), p.column(1), p.column(2));
    assert!((cp.data()[[0, 1, 2]] - c.contract(a, b, d)).abs() < 1e-14);
}
