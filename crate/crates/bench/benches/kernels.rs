use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxweights_bench::{lognormal_inputs, lognormal_scenario};
use maxweights_core::lattice::{LatticeParams, Shift};
use maxweights_core::maximal::{eval_dyadic_maximal, eval_lattice_maximal};
use maxweights_core::testing::{build_sparse_family, sawyer_constant, InnerMode};
use maxweights_core::weights::CubeFamily;
use std::hint::black_box;

fn maximal(c: &mut Criterion) {
    let mut g = c.benchmark_group("maximal");
    for (n, k, l) in [(1, 4, 4), (2, 1, 2)] {
        let params = LatticeParams::new(n, k, l, 1).unwrap();
        let funcs = lognormal_inputs(&params, 2);
        let label = format!("n{n}_K{k}_L{l}");
        g.bench_with_input(BenchmarkId::new("dyadic", &label), &funcs, |b, f| {
            b.iter(|| eval_dyadic_maximal(black_box(f), 0.5, Shift::ZERO).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("lattice", &label), &funcs, |b, f| {
            b.iter(|| eval_lattice_maximal(black_box(f), 0.5, None).unwrap())
        });
    }
    g.finish();
}

fn testing(c: &mut Criterion) {
    let mut g = c.benchmark_group("testing");
    g.sample_size(10);
    let params = LatticeParams::new(1, 2, 2, 1).unwrap();
    let scn = lognormal_scenario(params);
    g.bench_function("sawyer_lattice_n1", |b| {
        b.iter(|| sawyer_constant(black_box(&scn), CubeFamily::AllLattice, InnerMode::Lattice).unwrap())
    });
    g.bench_function("sawyer_dyadic_n1", |b| {
        b.iter(|| sawyer_constant(black_box(&scn), CubeFamily::Dyadic { shift: Shift::ZERO }, InnerMode::Lattice).unwrap())
    });
    let funcs = lognormal_inputs(&LatticeParams::new(2, 1, 2, 1).unwrap(), 2);
    g.bench_function("sparse_family_n2", |b| {
        b.iter(|| build_sparse_family(black_box(&funcs), 1.0, Shift::ZERO, None, None).unwrap())
    });
    g.finish();
}

criterion_group!(benches, maximal, testing);
criterion_main!(benches);
