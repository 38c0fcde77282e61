use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dialstruct::mutual::{fuse, gradients, train_on_pairs, FlowMode, ModelParams, TrainConfig};
use dialstruct_bench::planted_pairs;

fn bench_fuse(c: &mut Criterion) {
    let p = ModelParams::init(24, FlowMode::Scalar, 42);
    let mut group = c.benchmark_group("fuse");
    for n in [8, 16, 24] {
        let pair = planted_pairs(n, 1).remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pair, |b, pair| {
            b.iter(|| fuse(black_box(&pair.topic), black_box(&pair.rhetorical), &p).unwrap())
        });
    }
    group.finish();
}

fn bench_gradients(c: &mut Criterion) {
    let cfg = TrainConfig::default();
    let mut group = c.benchmark_group("gradients");
    for mode in [FlowMode::Scalar, FlowMode::PerIndex] {
        let p = ModelParams::init(24, mode, 42);
        for n in [8, 16, 24] {
            let pair = planted_pairs(n, 1).remove(0);
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), n), &pair, |b, pair| {
                b.iter(|| gradients(black_box(&pair.topic), black_box(&pair.rhetorical), &p, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_epoch(c: &mut Criterion) {
    let pairs = planted_pairs(12, 50);
    let cfg = TrainConfig {
        max_epochs: 1,
        patience: 1,
        ..Default::default()
    };
    c.bench_function("train_epoch_50x12", |b| b.iter(|| train_on_pairs(black_box(&pairs), None, &cfg).unwrap()));
}

criterion_group!(benches, bench_fuse, bench_gradients, bench_epoch);
criterion_main!(benches);
