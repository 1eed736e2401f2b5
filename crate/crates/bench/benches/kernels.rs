use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use statgeo_core::frobenius::{build_constant_curvature_k, opozda_basis, simultaneous_diagonalize, COMMUTING_TOLERANCE, DEFAULT_RESTARTS};
use statgeo_core::geometry::identity_suite;
use statgeo_core::sampling::{self, point_in_box, random_rotation};
use statgeo_core::tensor::{bracket, raise_index};
use statgeo_core::wdvv::{verify_aaf, DEFAULT_MARGIN, DEFAULT_TOLERANCE};
use statgeo_core::{BcnParams, Metric};

fn bench_bracket(c: &mut Criterion) {
    let mut group = c.benchmark_group("bracket");
    for n in [2, 4, 8] {
        let mut rng = sampling::rng(n as u64);
        let g = sampling::random_spd(&mut rng, n);
        let k = raise_index(&sampling::random_cubic(&mut rng, n, 1.0), &g).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &k, |b, k| b.iter(|| bracket(black_box(k))));
    }
    group.finish();
}

fn bench_identity_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("identity_suite");
    group.sample_size(20);
    for n in [2, 3] {
        let mut rng = sampling::rng(10 + n as u64);
        let chart = sampling::random_polynomial_chart(&mut rng, n);
        let x = point_in_box(&mut rng, chart.domain());
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| identity_suite(black_box(&chart), black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn bench_verify_aaf(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_aaf");
    group.sample_size(20);
    for (n, s, q) in [(2, 0.25, 1.0), (3, 0.5, -1.0)] {
        let params = BcnParams::new(n, s, q).unwrap();
        let mut rng = sampling::rng(20 + n as u64);
        let points = sampling::accepted_points(&mut rng, &vec![[-1.5, 1.5]; n], 5, |x| {
            params.check_generic(x, DEFAULT_MARGIN).is_ok()
        })
        .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &points, |b, p| {
            b.iter(|| verify_aaf(n, s, q, black_box(p), DEFAULT_MARGIN, DEFAULT_TOLERANCE).unwrap())
        });
    }
    group.finish();
}

fn bench_spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral");
    group.sample_size(20);
    for n in [2, 3, 4] {
        let lambda: Vec<f64> = (0..n).map(|i| 3.0 - 0.5 * i as f64).collect();
        let k = build_constant_curvature_k(&lambda, -0.5).unwrap();
        group.bench_with_input(BenchmarkId::new("opozda_basis", n), &k, |b, k| {
            b.iter(|| opozda_basis(black_box(k), -0.5, DEFAULT_RESTARTS, 7).unwrap())
        });

        let mut rng = sampling::rng(30 + n as u64);
        let c = sampling::diagonal_cubic_in_basis(&lambda, &random_rotation(&mut rng, n));
        let k = raise_index(&c, &Metric::identity(n)).unwrap();
        group.bench_with_input(BenchmarkId::new("simultaneous_diagonalize", n), &k, |b, k| {
            b.iter(|| simultaneous_diagonalize(black_box(k), COMMUTING_TOLERANCE, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_bracket, bench_identity_suite, bench_verify_aaf, bench_spectral);
criterion_main!(benches);
