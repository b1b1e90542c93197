use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sphfold::{estimate_class_measures, expansive_velocity, find_separation, flatten, PinnedSubchain};
use sphfold_bench::fixture;

fn bench_flatten(c: &mut Criterion) {
    let mut group = c.benchmark_group("flatten");
    group.sample_size(10);
    for n in [3, 5, 8] {
        let chain = fixture(n, 0.9 * TAU, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &chain, |b, chain| {
            b.iter(|| flatten(black_box(chain)).unwrap())
        });
    }
    group.finish();
}

fn bench_separation(c: &mut Criterion) {
    let chain = fixture(10, 0.95 * TAU, 7);
    c.bench_function("find_separation/10", |b| b.iter(|| find_separation(black_box(&chain)).unwrap()));
}

fn bench_measure(c: &mut Criterion) {
    let chain = fixture(6, 4.0, 3);
    let mut group = c.benchmark_group("measure");
    group.sample_size(10);
    group.bench_function("100k_poles", |b| {
        b.iter(|| estimate_class_measures(black_box(&chain), 100_000, 1).unwrap())
    });
    group.finish();
}

fn bench_velocity(c: &mut Criterion) {
    let chain = fixture(8, 2.5, 5);
    let sub = PinnedSubchain::whole(&chain);
    c.bench_function("expansive_velocity/8", |b| b.iter(|| expansive_velocity(black_box(&sub)).unwrap()));
}

criterion_group!(benches, bench_flatten, bench_separation, bench_measure, bench_velocity);
criterion_main!(benches);
