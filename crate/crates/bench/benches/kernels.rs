use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use purent_bench::{mixed, pure};
use purent_core::sdp::{solve, ConeMap, SdpProblem, SolverOptions};
use purent_core::states::purify;

fn linalg(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for d in [4usize, 8, 16, 32] {
        let r = mixed(&[d], d, d as u64);
        group.bench_with_input(BenchmarkId::from_parameter(d), &r, |b, r| {
            b.iter(|| black_box(r).eigh())
        });
    }
    group.finish();

    let r = mixed(&[3, 3, 3], 27, 1);
    c.bench_function("partial_transpose 3x3x3", |b| {
        b.iter(|| black_box(&r).partial_transpose(&[1]).unwrap())
    });
    c.bench_function("partial_trace 3x3x3", |b| {
        b.iter(|| black_box(&r).partial_trace(&[0, 2]).unwrap())
    });
    let psi = pure(&[4, 6], 3);
    c.bench_function("schmidt 4x6", |b| {
        b.iter(|| black_box(&psi).schmidt(&[0]).unwrap())
    });
    let low = mixed(&[2, 4], 5, 4);
    c.bench_function("purify 2x4 rank 5", |b| {
        b.iter(|| purify(black_box(&low), 1e-12).unwrap())
    });
}

fn sdp(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_max sdp");
    for d in [4usize, 8, 16] {
        let r = mixed(&[d], d, 10 + d as u64);
        let p = SdpProblem::maximize(r)
            .trace(1.0)
            .unwrap()
            .cone(ConeMap::Identity)
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &p, |b, p| {
            b.iter(|| solve(black_box(p), &SolverOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, linalg, sdp);
criterion_main!(benches);
