use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ulfo_bench::typical_model;
use ulfo_core::sim::{self, SimConfig};
use ulfo_core::study::{self, ScenarioRanges, SweepSpec};
use ulfo_core::{damping_decomposition, eigenvalues, Basis, Param, SystemParams};

fn eigen(c: &mut Criterion) {
    let a = typical_model().original().entries;
    c.bench_function("eigenvalues/typical", |b| b.iter(|| eigenvalues(black_box(&a)).unwrap()));
}

fn gdta(c: &mut Criterion) {
    let p = SystemParams::typical();
    c.bench_function("damping_decomposition/typical", |b| {
        b.iter(|| damping_decomposition(black_box(&p), black_box(0.4846)).unwrap())
    });
}

fn simulate(c: &mut Criterion) {
    let model = typical_model();
    let cfg = SimConfig::with_defaults(Basis::Original);
    c.bench_function("simulate/600s_dt0.01", |b| {
        b.iter(|| sim::simulate(black_box(&model.original()), &cfg).unwrap())
    });
}

fn studies(c: &mut Criterion) {
    let ranges = ScenarioRanges::default_ranges();
    let scenarios = study::sample_scenarios(&ranges, 500, 42).unwrap();
    c.bench_function("montecarlo_dm/500", |b| b.iter(|| study::montecarlo_dm(black_box(&scenarios))));
    let spec = SweepSpec::default_for(Param::KP1, SystemParams::typical()).unwrap();
    c.bench_function("sweep/KP1_50", |b| b.iter(|| study::sweep(black_box(&spec)).unwrap()));
}

criterion_group!(benches, eigen, gdta, simulate, studies);
criterion_main!(benches);
