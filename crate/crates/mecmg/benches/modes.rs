//! Sequential vs rayon execution of the experiment harness.
//!
//! Run with `cargo bench -p mecmg`. The parallel arms only exist with the
//! default `parallel` feature.

use criterion::{criterion_group, criterion_main, Criterion};
use mecmg::sim::{ExecMode, Experiment, Policy, SystemParams};

fn bench_params(runs: u32, rounds: u32) -> SystemParams {
    SystemParams {
        runs,
        rounds,
        ..SystemParams::paper_sec4_ms()
    }
}

fn experiment(c: &mut Criterion) {
    let exp = Experiment::from_plan(bench_params(8, 1500)).unwrap();
    let mut group = c.benchmark_group("experiment_all_policies");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| exp.run_all(ExecMode::Sequential))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| exp.run_all(ExecMode::Parallel)));
    group.finish();
}

fn mg_policy(c: &mut Criterion) {
    let exp = Experiment::from_plan(bench_params(16, 800)).unwrap();
    let mut group = c.benchmark_group("mg_runs");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| exp.run_policy(Policy::MinorityGame, ExecMode::Sequential))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| exp.run_policy(Policy::MinorityGame, ExecMode::Parallel))
    });
    group.finish();
}

criterion_group!(benches, experiment, mg_policy);
criterion_main!(benches);
