use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use xyness::oracle::{build_truncation, ness_estimates, spectrum, DEFAULT_TIME_STEP};
use xyness::scattering::ac_overlap;
use xyness::{
    correlation_block, heat_flux, ModelParams, QuadratureSpec, SiteWindow, ThermalConfig,
};

fn th() -> ThermalConfig {
    ThermalConfig::new(1.0, 2.0).unwrap()
}

fn analytic(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let p = ModelParams::new(0.2, 0).unwrap();
    c.bench_function("heat_flux", |b| {
        b.iter(|| heat_flux(black_box(&p), &th(), &spec).unwrap())
    });
    c.bench_function("ac_overlap(-1,2)", |b| {
        b.iter(|| ac_overlap(black_box(&p), &th(), -1, 2, &spec).unwrap())
    });
    c.bench_function("correlation_block 21 sites", |b| {
        b.iter(|| correlation_block(black_box(&p), &th(), SiteWindow::centered(10), &spec).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("magnetic spectrum M=500", |b| {
        b.iter(|| spectrum::magnetic(black_box(500), 0.2))
    });
    let sys = build_truncation(300, &ModelParams::new(0.2, 0).unwrap()).unwrap();
    g.bench_function("ness estimate M=300", |b| {
        b.iter(|| ness_estimates(&sys, &th(), &[(0, 1)], 200.0, DEFAULT_TIME_STEP).unwrap())
    });
    g.finish();
}

criterion_group!(benches, analytic, oracle);
criterion_main!(benches);
