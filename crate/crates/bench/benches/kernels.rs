use criterion::{criterion_group, criterion_main, Criterion};
use qeilab_core::field::numerical_range_sweep;
use qeilab_core::geometry::timelike_diameter;
use qeilab_core::qi::sharp_aqi;
use qeilab_core::scalar::{build_twopoint, kappa_bar, wick_dqi_bound};
use qeilab_core::worlds::demo_scenario;
use qeilab_core::{linalg, SamplingFunction, StateKind, SupportRegion, Worldline};
use std::hint::black_box;

fn scalar(c: &mut Criterion) {
    let wl = Worldline::static_origin();
    let g = SamplingFunction::bump(1.0);
    let vac = build_twopoint(StateKind::vacuum(0.0), &wl).unwrap();
    let th = build_twopoint(StateKind::thermal(1.0, 0.5), &wl).unwrap();
    c.bench_function("stationary bound, massless vacuum", |b| b.iter(|| wick_dqi_bound(black_box(&g), &wl, &vac).unwrap()));
    c.bench_function("stationary bound, massive thermal", |b| b.iter(|| wick_dqi_bound(black_box(&g), &wl, &th).unwrap()));
    c.bench_function("kappa_bar(1, 1)", |b| b.iter(|| kappa_bar(black_box(1.0), black_box(1.0)).unwrap()));
}

fn geometry(c: &mut Criterion) {
    let region = SupportRegion::sphere([0.0; 4], 1.0, 60).unwrap();
    let mut group = c.benchmark_group("geometry");
    group.sample_size(10);
    group.bench_function("timelike diameter, 60-point sphere", |b| b.iter(|| timelike_diameter(black_box(&region))));
    group.finish();
}

fn matrices(c: &mut Criterion) {
    let s = demo_scenario();
    let phi = s.random_natural_field(7, true);
    let tests = s.test_sets();
    c.bench_function("sharp bound, demo scenario", |b| b.iter(|| sharp_aqi(&s, black_box(&phi), &tests).unwrap()));
    let mut j = linalg::zeros(4);
    for k in 0..3 {
        j[(k, k + 1)] = linalg::c(1.0, 0.0);
    }
    c.bench_function("numerical range, 4x4 Jordan, 720 angles", |b| b.iter(|| numerical_range_sweep(black_box(&j), 720)));
}

criterion_group!(benches, scalar, geometry, matrices);
criterion_main!(benches);
