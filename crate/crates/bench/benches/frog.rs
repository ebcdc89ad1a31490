use criterion::{criterion_group, criterion_main, Criterion};

use frogld_core::{estimate_tail_local, simulate_run, StepSource};

fn bench_frog(c: &mut Criterion) {
    c.bench_function("simulate_run/target-256", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            simulate_run(256, 4096, &StepSource::seeded(std::hint::black_box(seed))).unwrap()
        })
    });

    c.bench_function("estimate_tail_local/n-16-1k", |b| {
        b.iter(|| estimate_tail_local(16, 1.0, 1.0, 1000, std::hint::black_box(7)).unwrap())
    });
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_frog
);
criterion_main!(benches);
