use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ltmax_core::walk::*;

fn discrete(c: &mut Criterion) {
    let mut g = c.benchmark_group("discrete_walk");
    for n in [1_000u64, 100_000] {
        g.throughput(Throughput::Elements(n));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let codec = SiteCodec::new(3).unwrap();
            let mut field = LocalTimeField::new(Mode::Discrete, codec);
            let mut r = 0;
            b.iter(|| {
                r += 1;
                black_box(run_discrete_in(&WalkConfig::discrete(3, n, 1, r), &mut field, None).unwrap());
            });
        });
    }
    g.finish();
}

fn continuous(c: &mut Criterion) {
    let mut g = c.benchmark_group("continuous_walk");
    let t = 10_000.0;
    g.throughput(Throughput::Elements(t as u64));
    g.bench_function("t=1e4", |b| {
        let codec = SiteCodec::new(3).unwrap();
        let mut field = LocalTimeField::new(Mode::Continuous, codec);
        let mut r = 0;
        b.iter(|| {
            r += 1;
            black_box(run_continuous_in(&WalkConfig::continuous(3, t, 2, r), &mut field, None, None).unwrap());
        });
    });
    g.finish();
}

fn leap(c: &mut Criterion) {
    let mut g = c.benchmark_group("origin_sample");
    g.sample_size(20);
    for trunc in [10_000u64, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(trunc), &trunc, |b, &trunc| {
            let mut r = 0;
            b.iter(|| {
                r += 1;
                black_box(origin_local_time_sample(&WalkConfig::discrete(3, 1, 3, r), trunc).unwrap());
            });
        });
    }
    g.finish();
}

criterion_group!(benches, discrete, continuous, leap);
criterion_main!(benches);
