use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use divkit::divergence::{closed_form, partition_sum, supsum_estimate};
use divkit::rng::{instance_rng, stream_id};
use divkit::verify::instances;
use divkit::{ExtendedConvexFunction, Generator, Measure, PartitionOfUnity};

fn closed_vs_partitions(c: &mut Criterion) {
    let mut group = c.benchmark_group("divergence");
    let f = ExtendedConvexFunction::builtin(Generator::Hellinger).unwrap();
    for n in [4usize, 16, 64, 256] {
        let mut rng = instance_rng(1, stream_id("bench"), n as u64);
        let (mu, nu) = instances::measure_pair(&mut rng, n);
        let g = PartitionOfUnity::sample_with(mu.space(), 8, &mut rng).unwrap();
        group.bench_with_input(BenchmarkId::new("closed_form", n), &n, |b, _| {
            b.iter(|| closed_form(&f, black_box(&mu), black_box(&nu)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("partition_sum_k8", n), &n, |b, _| {
            b.iter(|| partition_sum(&f, black_box(&mu), black_box(&nu), black_box(&g)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("supsum_estimate_200", n), &n, |b, _| {
            b.iter(|| supsum_estimate(&f, black_box(&mu), black_box(&nu), 6, 200, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, closed_vs_partitions);
criterion_main!(benches);
