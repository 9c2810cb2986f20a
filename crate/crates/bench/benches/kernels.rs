use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use projgrowth_core::em::{em_fit, EmConfig};
use projgrowth_core::gof::bootstrap_pvalue;
use projgrowth_core::rate_eq::iterate_master;
use projgrowth_core::rng::stream_rng;
use projgrowth_core::sim::{run, SimParams};
use projgrowth_core::yule::{mle_rho, sample};
use projgrowth_core::SizeDistribution;

fn yule_sample(rho: f64, n: usize, seed: u64) -> SizeDistribution {
    SizeDistribution::from_sizes(sample(rho, n, &mut stream_rng(seed, 0)).unwrap())
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    for alpha in [1.0, 0.5] {
        let params = SimParams::new(2.0 / 3.0, 200_000, 1).with_alpha(alpha);
        g.bench_with_input(BenchmarkId::new("alpha", alpha), &params, |b, p| b.iter(|| run(black_box(p)).unwrap()));
    }
    g.finish();
}

fn fitting(c: &mut Criterion) {
    let d = yule_sample(3.0, 10_000, 2);
    c.bench_function("mle_rho n=1e4", |b| b.iter(|| mle_rho(black_box(&d)).unwrap()));

    let mut inflated = d.clone();
    inflated.add(1, 3 * d.count(1));
    c.bench_function("em_fit n=1e4", |b| b.iter(|| em_fit(black_box(&inflated), &EmConfig::default()).unwrap()));

    let small = yule_sample(3.0, 2000, 3);
    let mut g = c.benchmark_group("bootstrap");
    g.sample_size(10);
    g.bench_function("n=2000 B=200", |b| b.iter(|| bootstrap_pvalue(black_box(&small), 200, 4).unwrap()));
    g.finish();
}

fn master(c: &mut Criterion) {
    let mut g = c.benchmark_group("master_equation");
    g.sample_size(10);
    g.bench_function("N=1e5", |b| b.iter(|| iterate_master(black_box(2.0 / 3.0), 100_000, &[100_000]).unwrap()));
    g.finish();
}

criterion_group!(benches, simulation, fitting, master);
criterion_main!(benches);
