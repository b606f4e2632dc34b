use cdd_core::{
    ergodic_sweep, rate_cdd, rate_cdd_reduced, reduce_to_parallel, sample_channels, sum_capacity,
    Metric, SystemConfig,
};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn per_realization(c: &mut Criterion) {
    let mut group = c.benchmark_group("per_realization");
    for (k, nt, nr) in [(2, 2, 2), (6, 3, 3), (4, 8, 4)] {
        let cfg = SystemConfig::new(k, nt, nr, 100.0, 1, 1).unwrap();
        let ch = sample_channels(&cfg, 0).unwrap();
        let id = format!("K{k}_nT{nt}_nR{nr}");
        group.bench_with_input(BenchmarkId::new("rate_cdd", &id), &ch, |b, ch| {
            b.iter(|| rate_cdd(black_box(ch), 100.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rate_cdd_reduced", &id), &ch, |b, ch| {
            b.iter(|| rate_cdd_reduced(&reduce_to_parallel(black_box(ch)), 100.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sum_capacity", &id), &ch, |b, ch| {
            b.iter(|| sum_capacity(black_box(ch), 100.0).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("ergodic_sweep");
    group.sample_size(10);
    let snrs: Vec<f64> = (0..=8).map(|i| 10f64.powf(i as f64 / 2.0)).collect();
    let cfg = SystemConfig::new(6, 3, 3, 1.0, 10_000, 4).unwrap();
    for metric in [Metric::CddRate, Metric::SumCapacity] {
        group.bench_function(format!("{metric:?}_K6_nT3_nR3_1e4"), |b| {
            b.iter(|| ergodic_sweep(metric, &cfg, &snrs).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, per_realization, monte_carlo);
criterion_main!(benches);
