//! Parallel against sequential sweeps over seeded instances.
//!
//! Only `par::map` differs between the two arms; with the `parallel` feature off both are
//! sequential and should time the same.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ftlabels::harness::{generate_graph, instance, sweep_instance, Profile, TestInstance};
use ftlabels::par;
use ftlabels::tz::tz_build;

fn small_profile() -> Profile {
    Profile { max_n: 8, max_m: 12, f: 1, ks: vec![2], ..Profile::default() }
}

fn sweep(c: &mut Criterion) {
    let profile = small_profile();
    let insts: Vec<TestInstance> = (0..4).map(|s| instance(s, &profile)).collect();
    let mut group = c.benchmark_group("sweep_instances");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("parallel", insts.len()), |b| b.iter(|| par::map(&insts, sweep_instance)));
    group.bench_function(BenchmarkId::new("sequential", insts.len()), |b| b.iter(|| par::map_sequential(&insts, sweep_instance)));
    group.finish();
}

fn tz(c: &mut Criterion) {
    let graphs: Vec<_> = (0..8).map(|s| generate_graph(s, 50, 150, 9)).collect();
    let mut group = c.benchmark_group("tz_build");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| par::map(&graphs, |g| tz_build(g, 3).unwrap())));
    group.bench_function("sequential", |b| b.iter(|| par::map_sequential(&graphs, |g| tz_build(g, 3).unwrap())));
    group.finish();
}

criterion_group!(benches, sweep, tz);
criterion_main!(benches);
