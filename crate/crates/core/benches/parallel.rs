use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpsgd_core::bounds::gamma;
use lpsgd_core::experiment::{
    run_synthetic, verify_lemma1, ExperimentConfig, ExperimentKind, SyntheticConfig,
};
use lpsgd_core::parallel::{grid_argmin, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn seed_sweep(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let mut group = c.benchmark_group("synthetic_seeds");
    group.sample_size(10);
    for (name, execution) in MODES {
        let config = ExperimentConfig {
            kind: ExperimentKind::SyntheticPowerNorm,
            seeds: (1..=8).collect(),
            execution,
            synthetic: SyntheticConfig {
                steps: 500,
                sweep: Some(vec![0.0348, 0.343]),
                ..SyntheticConfig::default()
            },
            out: None,
            logreg: Default::default(),
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_synthetic(black_box(&config), dir.path()).unwrap())
        });
    }
    group.finish();
}

fn lemma1(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma1_oracle");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_lemma1(black_box(16), 3, 2, 400, exec).unwrap())
        });
    }
    group.finish();
}

fn step_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_grid");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                grid_argmin(exec, 0.0, 2.0, black_box(100_000), |eta| {
                    gamma(eta, 0.3, 0.1, 2.0)
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, seed_sweep, lemma1, step_grid);
criterion_main!(benches);
