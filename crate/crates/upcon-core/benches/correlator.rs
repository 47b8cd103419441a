//! Correlator throughput: the default (rayon, when the `parallel` feature
//! is on) entry points against the single-threaded reference path, on
//! streams with realistic sparsity.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use upcon_core::rng::{CounterRng, StreamId};
use upcon_core::tcspc::{
    coincidence_histogram, coincidence_histogram_seq, fold_periodic_histogram, HistogramConfig,
    HistogramMode,
};
use upcon_core::units::{TimePs, PS_PER_S};

fn sorted_poisson(rate_hz: f64, duration_s: f64, key: u64) -> Vec<TimePs> {
    let mut rng = CounterRng::keyed(key, StreamId::TestOnly, 0);
    let n = (rate_hz * duration_s) as usize;
    let span = duration_s * PS_PER_S as f64;
    let mut v: Vec<TimePs> = (0..n).map(|_| (rng.uniform() * span) as TimePs).collect();
    v.sort_unstable();
    v
}

fn bench_coincidence(c: &mut Criterion) {
    let mut group = c.benchmark_group("coincidence_all_pairs");
    group.sample_size(10);
    for &total in &[2_000_000usize, 10_000_000] {
        let rate = total as f64 / 2.0 / 600.0;
        let a = sorted_poisson(rate, 600.0, 1);
        let b = sorted_poisson(rate, 600.0, 2);
        let cfg =
            HistogramConfig::new(250, -410_000, 410_000, HistogramMode::AllPairs).unwrap();
        let duration = 600 * PS_PER_S;
        group.throughput(Throughput::Elements(total as u64));
        group.bench_with_input(BenchmarkId::new("default", total), &total, |bench, _| {
            bench.iter(|| coincidence_histogram(&a, &b, &cfg, duration).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", total), &total, |bench, _| {
            bench.iter(|| coincidence_histogram_seq(&a, &b, &cfg, duration).unwrap())
        });
    }
    group.finish();
}

fn bench_fold(c: &mut Criterion) {
    let mut group = c.benchmark_group("fold_periodic");
    group.sample_size(10);
    let stops = sorted_poisson(20_000.0, 600.0, 3);
    let cfg = HistogramConfig::new(250, 0, 20_000, HistogramMode::AllPairs).unwrap();
    group.throughput(Throughput::Elements(stops.len() as u64));
    group.bench_function("default", |bench| {
        bench.iter(|| fold_periodic_histogram(&stops, 20_000, &cfg, 600 * PS_PER_S).unwrap())
    });
    group.finish();
}

fn bench_emitter(c: &mut Criterion) {
    use upcon_core::emitter::{generate_emission, EmitterParams};
    let mut group = c.benchmark_group("emitter");
    group.sample_size(10);
    let params = EmitterParams { target_flux_fiber_hz: 1e5, ..EmitterParams::default() };
    group.bench_function("generate_60s", |bench| {
        bench.iter(|| generate_emission(&params, 60.0, 42).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_coincidence, bench_fold, bench_emitter);
criterion_main!(benches);
