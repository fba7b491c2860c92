use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use luders_bench::{ANALYTIC_DIMS, DENSE_DIMS};
use luders_core::operators::{apply_c_fast, build_c_dense, uniform_superposition};
use luders_core::{
    eig_hermitian, walsh_hadamard, CycleEngine, EngineKind, RandomStream, SearchOperatorParams,
    DEFAULT_GROUP_TOL,
};

fn params(dim: usize) -> SearchOperatorParams {
    SearchOperatorParams::with_delta(dim, 0.1, Some(dim / 2 + 1)).unwrap()
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_hermitian");
    for dim in DENSE_DIMS {
        let op = build_c_dense(&params(dim)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &op, |b, op| {
            b.iter(|| eig_hermitian(black_box(op), DEFAULT_GROUP_TOL).unwrap())
        });
    }
    group.finish();
}

fn apply_c(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_c_fast");
    for dim in ANALYTIC_DIMS {
        let p = params(dim);
        let phi = uniform_superposition(p.register());
        group.bench_with_input(BenchmarkId::from_parameter(dim), &phi, |b, phi| {
            b.iter(|| apply_c_fast(&p, black_box(phi)).unwrap())
        });
    }
    group.finish();
}

fn hadamard(c: &mut Criterion) {
    let mut group = c.benchmark_group("walsh_hadamard");
    for dim in ANALYTIC_DIMS {
        let phi = uniform_superposition(params(dim).register());
        group.bench_with_input(BenchmarkId::from_parameter(dim), &phi, |b, phi| {
            b.iter(|| walsh_hadamard(black_box(phi)).unwrap())
        });
    }
    group.finish();
}

fn cycle(c: &mut Criterion) {
    let mut group = c.benchmark_group("cycle_engine");
    group.sample_size(10);
    for dim in ANALYTIC_DIMS {
        group.bench_with_input(BenchmarkId::new("prepare", dim), &dim, |b, &dim| {
            b.iter(|| {
                CycleEngine::new(EngineKind::Analytic, params(dim), DEFAULT_GROUP_TOL).unwrap()
            })
        });
        let engine =
            CycleEngine::new(EngineKind::Analytic, params(dim), DEFAULT_GROUP_TOL).unwrap();
        let mut rng = RandomStream::new(1);
        group.bench_with_input(BenchmarkId::new("trial", dim), &engine, |b, e| {
            b.iter(|| e.trial(&mut rng).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, eigensolver, apply_c, hadamard, cycle);
criterion_main!(benches);
