use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_intervals::evolution::local_translation_test;
use spectral_intervals::spectrum::compute_spectrum;
use spectral_intervals::{BoundaryMatrix, Execution, IntervalUnion, ScanOptions};

fn problem() -> (IntervalUnion, BoundaryMatrix) {
    let omega = IntervalUnion::new(&[(0.0, 0.7), (1.1, 2.0), (2.5, 3.1), (3.4, 4.6)]).unwrap();
    let b = BoundaryMatrix::random_haar(4, &mut ChaCha8Rng::seed_from_u64(42));
    (omega, b)
}

fn spectrum_scan(c: &mut Criterion) {
    let (omega, b) = problem();
    let mut group = c.benchmark_group("spectrum_scan");
    for exec in [Execution::Sequential, Execution::Parallel] {
        let opts = ScanOptions { exec, ..ScanOptions::default() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |bench, opts| {
            bench.iter(|| compute_spectrum(black_box(&omega), black_box(&b), (-20.0, 20.0), opts).unwrap())
        });
    }
    group.finish();
}

fn translation_trials(c: &mut Criterion) {
    let (omega, b) = problem();
    let mut group = c.benchmark_group("local_translation_trials");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |bench, &exec| {
            bench.iter(|| local_translation_test(black_box(&omega), black_box(&b), 500, 1e-9, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = spectrum_scan, translation_trials
}
criterion_main!(benches);
