mod common;

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsaw_core::lattice::torus_rep;
use wsaw_core::metropolis::{chain_rng, MetropolisChain};
use wsaw_core::scaling::{fdd_statistic_with, uniform_time_pairs, FddEstimator};
use wsaw_core::*;

use common::{all_pairs_product, for_each_walk, positions, srw_characteristic};

fn srw(dim: usize, n: usize, rng: &mut ChaCha8Rng) -> Walk {
    let steps = (0..n).map(|_| Step::new(rng.gen_range(0..dim), rng.gen())).collect();
    Walk::from_steps(dim, Ambient::Lattice, steps).unwrap()
}

/// Visit frequencies of every 3-step walk in d=2 against `K / c_3`.
#[test]
fn metropolis_stationary_law_on_all_short_walks() {
    let beta = 0.6;
    let params = ModelParams::lattice(2, beta, 3).unwrap();
    let mut exact: HashMap<Vec<Vec<i32>>, f64> = HashMap::new();
    for_each_walk(2, 3, |codes| {
        let pos = positions(2, codes, None);
        let k = all_pairs_product(&pos, beta);
        exact.insert(pos, k);
    });
    let total: f64 = exact.values().sum();
    let mut chain = MetropolisChain::new(&params, 0.5, true, chain_rng(4, 0)).unwrap();
    let sweeps = 400_000;
    let mut visits: HashMap<Vec<Vec<i32>>, usize> = HashMap::new();
    for _ in 0..1000 {
        chain.sweep(1);
    }
    for _ in 0..sweeps {
        chain.sweep(1);
        let pos: Vec<Vec<i32>> = chain.walk().positions().map(|p| p.to_vec()).collect();
        *visits.entry(pos).or_default() += 1;
    }
    assert_eq!(visits.len(), exact.len(), "every walk is visited");
    for (pos, k) in &exact {
        let p = k / total;
        let f = visits.get(pos).copied().unwrap_or(0) as f64 / sweeps as f64;
        // generous allowance for autocorrelation
        let se = (p * (1.0 - p) / sweeps as f64).sqrt() * 3.0;
        assert!((f - p).abs() < 5.0 * se, "{pos:?}: {f} vs {p}");
    }
}

#[test]
fn two_seeds_agree() {
    let params = ModelParams::lattice(3, 0.3, 20).unwrap();
    let run = |seed| {
        let cfg = MetropolisConfig {
            sweeps: 40_000,
            thermalization: 1000,
            seed,
            ..Default::default()
        };
        metropolis_sample(&params, &cfg, &[Observable::EndpointNormSq]).unwrap().estimates[0].estimate
    };
    let (a, b) = (run(1), run(2));
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 3.0 * se, "{a:?} vs {b:?}");
}

#[test]
fn perm_covers_exact_counts() {
    for beta in [0.05, 0.1] {
        let exact = enumerate_with(&ModelParams::lattice(5, beta, 8).unwrap(), &EnumerationOptions::counts_only()).unwrap();
        let lower: Vec<f64> = (0..=8)
            .map(|n| {
                enumerate_with(&ModelParams::lattice(5, beta, n).unwrap(), &EnumerationOptions::counts_only())
                    .unwrap()
                    .c_n
            })
            .collect();
        assert_eq!(lower[8], exact.c_n);
        let runs: Vec<PermResult> = (0..50)
            .map(|s| {
                perm_run(
                    &ModelParams::lattice(5, beta, 8).unwrap(),
                    &ChainGrowthConfig::default().with_tours(400).with_seed(s),
                )
                .unwrap()
            })
            .collect();
        for n in [4usize, 6, 8] {
            let ests: Vec<EstimateWithError> = runs.iter().map(|r| r.partition(n)).collect();
            let mean = ests.iter().map(|e| e.mean).sum::<f64>() / 50.0;
            let se = ests.iter().map(|e| e.std_error.powi(2)).sum::<f64>().sqrt() / 50.0;
            assert!((mean - lower[n]).abs() <= 3.0 * se, "beta={beta} n={n}: {mean} vs {}", lower[n]);
        }
    }
}

#[test]
fn free_fdd_matches_random_walk_characteristic_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 60;
    let walks: Vec<Walk> = (0..20_000).map(|_| srw(3, n, &mut rng)).collect();
    let grid = standard_frequency_grid(3, 1, n as f64).unwrap();
    for est in [FddEstimator::Plain, FddEstimator::Symmetrized] {
        let res = fdd_statistic_with(&walks, &grid, 1.0, est).unwrap();
        for (i, spec) in grid.iter().enumerate() {
            let exact = srw_characteristic(&spec.frequencies[0], n as f64, n);
            let diff = (res.means[i] - exact).norm();
            assert!(diff <= 4.0 * res.std_errors[i], "{est:?} entry {i}: {} vs {exact}", res.means[i]);
        }
    }
}

#[test]
fn free_fdd_deviation_shrinks_with_k() {
    // exact random-walk characteristic functions approach the Gaussian
    let u = [2.0, 0.0, 0.0];
    let gauss = (-(4.0f64) / 6.0).exp();
    let devs: Vec<f64> = [10usize, 100, 1000]
        .iter()
        .map(|&k| (srw_characteristic(&u, k as f64, k) - gauss).abs())
        .collect();
    assert!(devs[0] > devs[1] && devs[1] > devs[2]);
    let spec = IncrementSpec::new(vec![0.0, 1.0], vec![u.to_vec()], 1.0).unwrap();
    assert!((GaussianReference.value(&spec) - gauss).abs() < 1e-15);
}

#[test]
fn free_tightness_ratio_near_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 144;
    let walks: Vec<Walk> = (0..10_000).map(|_| srw(4, n, &mut rng)).collect();
    let res = tightness_check(&walks, 12, &uniform_time_pairs(1.0, 8)).unwrap();
    assert!(res.a_hat > 0.95 && res.a_hat < 1.15, "A_hat = {}", res.a_hat);
}

#[test]
fn diffusion_fit_recovers_synthetic_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let data: BTreeMap<usize, f64> = (1..=400).map(|n| (n, 1.3 * n as f64 * (1.0 + 0.01 * (rng.gen::<f64>() - 0.5)))).collect();
    let fit = diffusion_fit(&data, (200, 400)).unwrap();
    assert!((fit.d_hat - 1.3).abs() < 0.005);
    assert!(fit.residual < 0.01);
}

#[test]
fn free_degenerate_tail_matches_direct_simulation() {
    let (dim, n, r, eps) = (3usize, 30usize, 8u32, 0.25);
    let cfg = MetropolisConfig {
        sweeps: 2000,
        thermalization: 500,
        seed: 1,
        ..Default::default()
    };
    let samples = 20_000;
    let row = &degenerate_regime_check(dim, 0.0, &[(n, r)], eps, samples, &cfg).unwrap()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut hits = 0;
    for _ in 0..samples {
        let w = srw(dim, n, &mut rng);
        let sup = w
            .positions()
            .map(|p| p.iter().map(|&c| (torus_rep(c, r) as f64).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        hits += usize::from(sup > eps * r as f64);
    }
    let p = hits as f64 / samples as f64;
    let se = (row.std_error.powi(2) + p * (1.0 - p) / samples as f64).sqrt();
    assert!((row.probability - p).abs() < 4.0 * se, "{} vs {p}", row.probability);
}

#[test]
fn torus_samples_wrap() {
    let params = ModelParams::torus(5, 0.1, 4, 200).unwrap();
    let cfg = MetropolisConfig {
        sweeps: 2000,
        thermalization: 500,
        ..Default::default()
    };
    let walks = sample_paths(&params, &cfg, 20).unwrap();
    assert_eq!(walks.len(), 20);
    let wraps = walks.iter().filter(|w| {
        let mut seen: HashMap<&[i32], usize> = HashMap::new();
        for p in w.positions() {
            *seen.entry(p).or_default() += 1;
        }
        seen.values().any(|&m| m > 1)
    });
    assert!(wraps.count() > 0);
    assert!(sample_paths(&params, &cfg, 0).unwrap().is_empty());
}
