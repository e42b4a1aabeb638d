use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mg_core::empirical::lambda_n;
use mg_core::estimator::{default_grid, default_interval, estimate_density, DEFAULT_GRID_POINTS};
use mg_core::gcm::gcm_of_step;
use mg_core::minimax::build_certificate;
use mg_core::DistributionSpec;

fn bench_gcm(c: &mut Criterion) {
    let spec = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let mut group = c.benchmark_group("gcm_of_step");
    for n in [1_000usize, 10_000, 100_000] {
        let sample = spec.sample(n, 1).unwrap();
        let lam = lambda_n(&sample);
        let (a, b) = default_interval(&sample);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| gcm_of_step(black_box(&lam), a, b).unwrap())
        });
    }
    group.finish();
}

fn bench_estimate(c: &mut Criterion) {
    let spec = DistributionSpec::perturbed_uniform(0.1).unwrap();
    let mut group = c.benchmark_group("estimate_density");
    for n in [1_000usize, 32_000] {
        let sample = spec.sample(n, 2).unwrap();
        let (a, b) = default_interval(&sample);
        let grid = default_grid(a, b, DEFAULT_GRID_POINTS);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| estimate_density(black_box(&sample), a, b, &grid).unwrap())
        });
    }
    group.finish();
}

fn bench_certificate(c: &mut Criterion) {
    c.bench_function("build_certificate/1000", |b| b.iter(|| build_certificate(black_box(1000)).unwrap()));
}

criterion_group!(benches, bench_gcm, bench_estimate, bench_certificate);
criterion_main!(benches);
