//! Sequential vs rayon throughput for the claim-parallel stages.

#[path = "../tests/common/mod.rs"]
mod common;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use leakaudit::probe::ProbeConfig;
use leakaudit::{par, Dataset, Execution, LabelScheme, PatternSet};

use common::synth::{self, Shape};

fn dataset() -> Dataset {
    let records = synth::generate(&synth::POLITIFACT, Shape { mixed: 1500, fully_leaked: 100, unleaked: 1400 }, 0, 7);
    Dataset::from_records(records, Default::default()).unwrap()
}

fn bench(c: &mut Criterion) {
    let d = dataset();
    let ps = PatternSet::default();
    let cfg = ProbeConfig::for_organization(&LabelScheme::default(), "politifact").unwrap();
    let modes = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

    let mut g = c.benchmark_group("classify_dataset");
    g.throughput(Throughput::Elements(d.len() as u64));
    for (name, exec) in modes {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| ps.classify_dataset(&d, exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("featurize");
    g.throughput(Throughput::Elements(d.len() as u64));
    for (name, exec) in modes {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| par::map(&d.records, exec, |r| cfg.featurize(&cfg.input_for(r)).nnz()))
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench
}
criterion_main!(benches);
