use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wsaw_bench::folded_walk;
use wsaw_core::lace::kjk_max_residual;
use wsaw_core::metropolis::{chain_rng, MetropolisChain};
use wsaw_core::{enumerate_with, perm_run, ChainGrowthConfig, EnumerationOptions, ModelParams};

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    for n in [6usize, 7] {
        let p = ModelParams::lattice(5, 0.1, n).unwrap();
        g.bench_with_input(BenchmarkId::new("d5", n), &p, |b, p| {
            b.iter(|| enumerate_with(p, &EnumerationOptions::counts_only()).unwrap().c_n)
        });
    }
    g.finish();
}

fn kjk(c: &mut Criterion) {
    let mut g = c.benchmark_group("kjk");
    for n in [8usize, 12] {
        let w = folded_walk(n);
        g.bench_with_input(BenchmarkId::new("folded", n), &w, |b, w| b.iter(|| kjk_max_residual(black_box(w), 0.3)));
    }
    g.finish();
}

fn perm(c: &mut Criterion) {
    let mut g = c.benchmark_group("perm");
    g.sample_size(10);
    let p = ModelParams::lattice(5, 0.1, 200).unwrap();
    let cfg = ChainGrowthConfig::default().with_tours(200);
    g.bench_function("d5_n200_200tours", |b| b.iter(|| perm_run(&p, &cfg).unwrap().log_scale[200]));
    g.finish();
}

fn pivot(c: &mut Criterion) {
    let mut g = c.benchmark_group("metropolis");
    for n in [100usize, 1000] {
        let p = ModelParams::lattice(5, 0.1, n).unwrap();
        let mut chain = MetropolisChain::new(&p, 1.0, false, chain_rng(0, 0)).unwrap();
        g.bench_function(BenchmarkId::new("pivot_sweep", n), |b| b.iter(|| chain.sweep(10)));
    }
    g.finish();
}

criterion_group!(benches, enumeration, kjk, perm, pivot);
criterion_main!(benches);
