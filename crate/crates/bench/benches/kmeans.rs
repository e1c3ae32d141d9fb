use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fedids::kmeans::{assign, kmeanspp_init};
use fedids::protocol::{fed_kmeanspp_init, Protocol};
use fedids::Federation;
use fedids_bench::{blobs, clients};
use std::hint::black_box;

fn assignment(c: &mut Criterion) {
    let mut g = c.benchmark_group("assign");
    for rows in [1_000, 20_000] {
        let points = blobs(rows, 16, 8, 1);
        let centroids = kmeanspp_init(&points, 32, 1).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(rows), &points, |b, p| {
            b.iter(|| assign(black_box(p), &centroids).unwrap())
        });
    }
    g.finish();
}

fn seeding(c: &mut Criterion) {
    let points = blobs(5_000, 8, 8, 2);
    let mut g = c.benchmark_group("seeding");
    g.bench_function("centralized k=20", |b| {
        b.iter(|| kmeanspp_init(black_box(&points), 20, 3).unwrap())
    });
    for n in [1, 10] {
        g.bench_with_input(BenchmarkId::new("federated k=20", n), &n, |b, &n| {
            b.iter(|| fed_kmeanspp_init(clients(&points, n), 20, 3).unwrap())
        });
    }
    g.finish();
}

fn rounds(c: &mut Criterion) {
    let points = blobs(5_000, 8, 8, 4);
    let mut g = c.benchmark_group("round");
    for protocol in [Protocol::FedKmeansFedInit, Protocol::GarstReinders] {
        g.bench_function(format!("{protocol:?} k=20 r=5 N=10"), |b| {
            b.iter(|| {
                let mut fed = Federation::new(clients(&points, 10), 5).unwrap();
                fed.run(protocol, 20, 5).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, assignment, seeding, rounds);
criterion_main!(benches);
