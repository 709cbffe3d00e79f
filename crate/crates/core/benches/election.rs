use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ringleader::bench::{run_once, Kind, RunOptions};

const SEED: u64 = 0x5eed;

fn rings(c: &mut Criterion) {
    let opts = RunOptions::default();
    let mut group = c.benchmark_group("ring");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(5));
    for n in [64, 256, 1024, 4096] {
        for kind in Kind::ALL {
            group.bench_with_input(BenchmarkId::new(kind.to_string(), n), &n, |b, &n| {
                // Executor start-up is excluded; only the run itself counts.
                b.iter_custom(|iters| {
                    (0..iters)
                        .map(|_| run_once(kind, n, SEED, &opts).expect("run succeeds").wall)
                        .sum()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, rings);
criterion_main!(benches);
