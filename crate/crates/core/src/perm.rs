//! Pruned-enriched Rosenbluth chain growth for `c_n` and `c_n^T`.
//!
//! Walks grow one step at a time. The next step is drawn with probability
//! proportional to `(1-β)^m`, where `m` is the multiplicity of the target
//! site, and the running weight is multiplied by the atmosphere `Σ (1-β)^m`.
//! Weights are carried as ratios to a per-length reference `Ẑ_k`. The
//! reference comes from a sequential pilot run in which the thresholds track
//! running estimates of `c_k`. It is then frozen: during the main tours the
//! enrichment and pruning thresholds are fixed, so tours are independent and
//! every length-k partial sum is an unbiased estimate of `c_k / Ẑ_k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{site_key, torus_rep, SiteTable, MAX_COORD, MAX_DIM};
use crate::params::ModelParams;
use crate::stats::{batch_means, batch_size_for, ratio_estimate, EstimateWithError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainGrowthConfig {
    pub tours: usize,
    pub enrich_threshold: f64,
    pub prune_threshold: f64,
    pub seed: u64,
    /// Tours of the adaptive pilot that fixes the per-length reference weights.
    pub pilot_tours: usize,
    /// Cap on pending enriched copies within one tour.
    pub max_pending: usize,
    /// Cap on growth steps within one tour.
    pub max_tour_steps: u64,
}

impl Default for ChainGrowthConfig {
    fn default() -> Self {
        ChainGrowthConfig {
            tours: 1000,
            enrich_threshold: 2.0,
            prune_threshold: 0.5,
            seed: 0,
            pilot_tours: 256,
            max_pending: 1 << 20,
            max_tour_steps: 1 << 32,
        }
    }
}

impl ChainGrowthConfig {
    pub fn with_tours(mut self, tours: usize) -> Self {
        self.tours = tours;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tours == 0 {
            return Err(Error::InvalidParameter("tours must be positive".into()));
        }
        if self.pilot_tours == 0 {
            return Err(Error::InvalidParameter("pilot_tours must be positive".into()));
        }
        let (p, e) = (self.prune_threshold, self.enrich_threshold);
        if !(p.is_finite() && e.is_finite() && 0.0 < p && p < e) {
            return Err(Error::InvalidParameter(format!("need 0 < prune_threshold < enrich_threshold, got {p} and {e}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TourStats {
    pub tours: usize,
    pub enriched: u64,
    pub pruned: u64,
    pub trapped: u64,
    pub deepest: usize,
    pub max_pending: usize,
}

impl TourStats {
    fn merge(&mut self, o: &TourStats) {
        self.tours += o.tours;
        self.enriched += o.enriched;
        self.pruned += o.pruned;
        self.trapped += o.trapped;
        self.deepest = self.deepest.max(o.deepest);
        self.max_pending = self.max_pending.max(o.max_pending);
    }
}

/// Per-length output of a chain-growth run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermResult {
    pub params: ModelParams,
    /// `ln Ẑ_k` for `k = 0..=n`.
    pub log_scale: Vec<f64>,
    /// Estimates of `c_k / Ẑ_k`.
    pub partition_ratio: Vec<EstimateWithError>,
    /// Estimates of `E|ω(k)|²` under the length-k measure.
    pub msd: Vec<EstimateWithError>,
    pub stats: TourStats,
}

impl PermResult {
    pub fn n(&self) -> usize {
        self.log_scale.len() - 1
    }

    /// Estimate of `c_k`. Overflows to infinity once `c_k` leaves the f64 range.
    pub fn partition(&self, k: usize) -> EstimateWithError {
        self.partition_ratio[k].scaled(self.log_scale[k].exp())
    }

    /// `ln c_k` with its delta-method standard error.
    pub fn log_partition(&self, k: usize) -> EstimateWithError {
        let r = &self.partition_ratio[k];
        EstimateWithError {
            mean: self.log_scale[k] + r.mean.ln(),
            std_error: r.std_error / r.mean,
            n_effective: r.n_effective,
        }
    }
}

/// Estimate of `c_n` (or `c_n^T` on the torus).
pub fn perm_partition_estimate(params: &ModelParams, cfg: &ChainGrowthConfig) -> Result<EstimateWithError> {
    Ok(perm_run(params, cfg)?.partition(params.n))
}

pub fn perm_run(params: &ModelParams, cfg: &ChainGrowthConfig) -> Result<PermResult> {
    params.validate()?;
    cfg.validate()?;
    let n = params.n;
    if n == 0 {
        return Err(Error::Precondition("chain growth needs n >= 1".into()));
    }
    if n > MAX_COORD as usize {
        return Err(Error::InvalidParameter(format!("walk length {n} exceeds {MAX_COORD}")));
    }
    let log_scale = pilot_log_scale(params, cfg)?;
    // per-step ratio update exp(ln Ẑ_k - ln Ẑ_{k+1})
    let step_factor: Vec<f64> = (0..n).map(|k| (log_scale[k] - log_scale[k + 1]).exp()).collect();

    let block = (batch_size_for(cfg.tours) / 2).max(1);
    let blocks: Vec<(usize, usize)> = (0..cfg.tours).step_by(block).map(|s| (s, (s + block).min(cfg.tours))).collect();
    let outputs: Vec<Result<BlockSums>> = blocks
        .par_iter()
        .map(|&(start, end)| {
            let mut sums = BlockSums::new(n, end - start);
            let mut state = GrowthState::new(params);
            let mut stack = Vec::new();
            for tour in start..end {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(tour as u64 + 1);
                run_tour(&mut state, &mut stack, &step_factor, cfg, &mut rng, &mut sums)?;
            }
            Ok(sums)
        })
        .collect();
    let mut stats = TourStats::default();
    let mut all = Vec::with_capacity(outputs.len());
    for o in outputs {
        let o = o?;
        stats.merge(&o.stats);
        all.push(o);
    }
    let total_z: f64 = all.iter().map(|b| b.z[n]).sum();
    if total_z == 0.0 {
        return Err(Error::DegenerateSampler {
            tours: cfg.tours,
            target: n,
            deepest: stats.deepest,
            pruned: stats.pruned,
            trapped: stats.trapped,
        });
    }

    let complete: Vec<&BlockSums> = all.iter().filter(|b| b.size == block).collect();
    let tours = cfg.tours as f64;
    let mut partition_ratio = Vec::with_capacity(n + 1);
    let mut msd = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let z_tot: f64 = all.iter().map(|b| b.z[k]).sum();
        let m_tot: f64 = all.iter().map(|b| b.m[k]).sum();
        let z_means: Vec<f64> = complete.iter().map(|b| b.z[k] / block as f64).collect();
        let mut z_est = if z_means.is_empty() {
            EstimateWithError::exact(0.0)
        } else {
            batch_means(&z_means)?
        };
        z_est.mean = z_tot / tours;
        z_est.n_effective *= block as f64;
        partition_ratio.push(z_est);
        let m_est = if z_tot == 0.0 {
            EstimateWithError {
                mean: f64::NAN,
                std_error: f64::NAN,
                n_effective: 1.0,
            }
        } else {
            let num: Vec<f64> = complete.iter().map(|b| b.m[k]).collect();
            let den: Vec<f64> = complete.iter().map(|b| b.z[k]).collect();
            let mut e = if den.iter().sum::<f64>() > 0.0 {
                ratio_estimate(&num, &den)?
            } else {
                EstimateWithError::exact(0.0)
            };
            e.mean = m_tot / z_tot;
            e.n_effective *= block as f64;
            e
        };
        msd.push(m_est);
    }
    Ok(PermResult {
        params: *params,
        log_scale,
        partition_ratio,
        msd,
        stats,
    })
}

struct BlockSums {
    size: usize,
    z: Vec<f64>,
    m: Vec<f64>,
    stats: TourStats,
}

impl BlockSums {
    fn new(n: usize, size: usize) -> Self {
        BlockSums {
            size,
            z: vec![0.0; n + 1],
            m: vec![0.0; n + 1],
            stats: TourStats::default(),
        }
    }
}

/// Current walk of a growing chain with its site multiplicities.
struct GrowthState {
    dim: usize,
    torus: Option<u32>,
    coords: Vec<[i32; MAX_DIM]>,
    keys: Vec<u128>,
    sites: SiteTable,
    /// `(1-β)^m` for `m = 0..=n`.
    powers: Vec<f64>,
}

impl GrowthState {
    fn new(params: &ModelParams) -> Self {
        let omb = 1.0 - params.beta;
        let powers = (0..=params.n + 1).map(|m| if m == 0 { 1.0 } else { omb.powi(m as i32) }).collect();
        let mut s = GrowthState {
            dim: params.dim,
            torus: params.torus,
            coords: Vec::with_capacity(params.n + 1),
            keys: Vec::with_capacity(params.n + 1),
            sites: SiteTable::with_capacity(params.n + 1),
            powers,
        };
        s.reset();
        s
    }

    fn reset(&mut self) {
        self.coords.clear();
        self.keys.clear();
        self.sites.clear();
        let origin = [0i32; MAX_DIM];
        let key = site_key(&origin[..self.dim]);
        self.coords.push(origin);
        self.keys.push(key);
        self.sites.insert(key);
    }

    fn depth(&self) -> usize {
        self.coords.len() - 1
    }

    fn neighbour(&self, code: usize) -> [i32; MAX_DIM] {
        let mut c = *self.coords.last().unwrap();
        let axis = code / 2;
        c[axis] += if code % 2 == 0 { 1 } else { -1 };
        if let Some(r) = self.torus {
            c[axis] = torus_rep(c[axis], r);
        }
        c
    }

    /// Fills per-direction weights and returns their sum.
    fn atmosphere(&self, weights: &mut [f64; 2 * MAX_DIM]) -> f64 {
        let mut atm = 0.0;
        for (code, w) in weights.iter_mut().enumerate().take(2 * self.dim) {
            let c = self.neighbour(code);
            *w = self.powers[self.sites.get(site_key(&c[..self.dim])) as usize];
            atm += *w;
        }
        atm
    }

    fn push(&mut self, code: usize) {
        let c = self.neighbour(code);
        let key = site_key(&c[..self.dim]);
        self.sites.insert(key);
        self.coords.push(c);
        self.keys.push(key);
    }

    fn truncate(&mut self, k: usize) {
        while self.coords.len() > k + 1 {
            self.coords.pop();
            let key = self.keys.pop().unwrap();
            self.sites.remove(key);
        }
    }

    fn norm_sq(&self) -> f64 {
        self.coords.last().unwrap()[..self.dim].iter().map(|&x| (x as i64 * x as i64) as f64).sum()
    }

    /// Draws a direction from the weights; `atm` must be positive.
    fn choose<R: Rng>(&self, weights: &[f64; 2 * MAX_DIM], atm: f64, rng: &mut R) -> usize {
        let u = rng.gen::<f64>() * atm;
        let mut acc = 0.0;
        let mut last = 0;
        for (code, &w) in weights.iter().enumerate().take(2 * self.dim) {
            if w > 0.0 {
                acc += w;
                last = code;
                if u < acc {
                    return code;
                }
            }
        }
        last
    }
}

fn run_tour<R: Rng>(
    state: &mut GrowthState,
    stack: &mut Vec<(usize, f64)>,
    step_factor: &[f64],
    cfg: &ChainGrowthConfig,
    rng: &mut R,
    sums: &mut BlockSums,
) -> Result<()> {
    let n = step_factor.len();
    let mut weights = [0.0; 2 * MAX_DIM];
    state.reset();
    stack.clear();
    stack.push((0, 1.0));
    sums.z[0] += 1.0;
    sums.stats.tours += 1;
    let mut steps = 0u64;
    while let Some((k, mut rho)) = stack.pop() {
        state.truncate(k);
        let mut j = k;
        while j < n {
            steps += 1;
            if steps > cfg.max_tour_steps {
                return Err(Error::BudgetExceeded {
                    what: "growth steps per tour",
                    needed: steps as u128,
                    limit: cfg.max_tour_steps as u128,
                });
            }
            let atm = state.atmosphere(&mut weights);
            if atm == 0.0 {
                sums.stats.trapped += 1;
                break;
            }
            let code = state.choose(&weights, atm, rng);
            state.push(code);
            rho *= atm * step_factor[j];
            j += 1;
            sums.z[j] += rho;
            sums.m[j] += rho * state.norm_sq();
            sums.stats.deepest = sums.stats.deepest.max(j);
            if j == n {
                break;
            }
            if rho > cfg.enrich_threshold {
                rho *= 0.5;
                stack.push((j, rho));
                sums.stats.enriched += 1;
                sums.stats.max_pending = sums.stats.max_pending.max(stack.len());
                if stack.len() > cfg.max_pending {
                    return Err(Error::BudgetExceeded {
                        what: "pending enriched copies",
                        needed: stack.len() as u128,
                        limit: cfg.max_pending as u128,
                    });
                }
            } else if rho < cfg.prune_threshold {
                if rng.gen::<bool>() {
                    sums.stats.pruned += 1;
                    break;
                }
                rho *= 2.0;
            }
        }
    }
    debug_assert_eq!(state.depth(), state.coords.len() - 1);
    Ok(())
}

/// `ln Ẑ_k` from a sequential pilot whose thresholds follow the running
/// estimate `ln(Σ W_k / tours so far)`. Lengths never reached extrapolate
/// the last growth rate.
fn pilot_log_scale(params: &ModelParams, cfg: &ChainGrowthConfig) -> Result<Vec<f64>> {
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    let mut state = GrowthState::new(params);
    let mut weights = [0.0; 2 * MAX_DIM];
    // ln Σ W_k over all pilot walks reaching length k
    let mut log_sum = vec![f64::NEG_INFINITY; n + 1];
    let ln_enrich = cfg.enrich_threshold.ln();
    let ln_prune = cfg.prune_threshold.ln();
    let mut stack: Vec<(usize, f64)> = Vec::new();
    for tour in 0..cfg.pilot_tours {
        let ln_tours = ((tour + 1) as f64).ln();
        state.reset();
        stack.push((0, 0.0));
        let mut steps = 0u64;
        while let Some((k, mut lw)) = stack.pop() {
            state.truncate(k);
            let mut j = k;
            while j < n {
                steps += 1;
                if steps > cfg.max_tour_steps {
                    return Err(Error::BudgetExceeded {
                        what: "growth steps per tour",
                        needed: steps as u128,
                        limit: cfg.max_tour_steps as u128,
                    });
                }
                let atm = state.atmosphere(&mut weights);
                if atm == 0.0 {
                    break;
                }
                let code = state.choose(&weights, atm, &mut rng);
                state.push(code);
                lw += atm.ln();
                j += 1;
                log_sum[j] = log_add(log_sum[j], lw);
                if j == n {
                    break;
                }
                let reference = log_sum[j] - ln_tours;
                if lw > reference + ln_enrich {
                    lw -= std::f64::consts::LN_2;
                    stack.push((j, lw));
                    if stack.len() > cfg.max_pending {
                        return Err(Error::BudgetExceeded {
                            what: "pending enriched copies",
                            needed: stack.len() as u128,
                            limit: cfg.max_pending as u128,
                        });
                    }
                } else if lw < reference + ln_prune {
                    if rng.gen::<bool>() {
                        break;
                    }
                    lw += std::f64::consts::LN_2;
                }
            }
        }
    }
    let ln_p = (cfg.pilot_tours as f64).ln();
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = if log_sum[k] == f64::NEG_INFINITY {
            let rate = if k >= 2 {
                out[k - 1] - out[k - 2]
            } else {
                (params.coordination() as f64).ln()
            };
            out[k - 1] + rate
        } else {
            log_sum[k] - ln_p
        };
    }
    Ok(out)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = ChainGrowthConfig::default();
        assert!(ok.validate().is_ok());
        for (p, e) in [(0.0, 2.0), (2.0, 2.0), (3.0, 2.0), (-1.0, 1.0), (0.5, f64::INFINITY)] {
            let c = ChainGrowthConfig {
                prune_threshold: p,
                enrich_threshold: e,
                ..ok.clone()
            };
            assert!(matches!(c.validate(), Err(Error::InvalidParameter(_))), "{p} {e}");
        }
        let p = ModelParams::lattice(2, 0.1, 0).unwrap();
        assert!(matches!(perm_run(&p, &ok), Err(Error::Precondition(_))));
    }

    #[test]
    fn free_walk_is_exact() {
        for d in [1usize, 2, 5] {
            let p = ModelParams::lattice(d, 0.0, 8).unwrap();
            let e = perm_partition_estimate(&p, &ChainGrowthConfig::default().with_tours(100)).unwrap();
            let exact = (2.0 * d as f64).powi(8);
            assert!((e.mean / exact - 1.0).abs() < 1e-12, "{} vs {exact}", e.mean);
            assert!(e.std_error <= 1e-12 * exact);
        }
    }

    #[test]
    fn seeded_determinism() {
        let p = ModelParams::lattice(3, 0.3, 12).unwrap();
        let cfg = ChainGrowthConfig::default().with_tours(300).with_seed(11);
        let a = perm_run(&p, &cfg).unwrap();
        let b = perm_run(&p, &cfg).unwrap();
        assert_eq!(a, b);
        let c = perm_run(&p, &cfg.clone().with_seed(12)).unwrap();
        assert_ne!(a.partition(12).mean, c.partition(12).mean);
    }

    #[test]
    fn small_lengths_match_closed_forms() {
        // c_1 = 2d, c_2 = (2d)^2 - 2dβ
        let p = ModelParams::lattice(2, 0.4, 6).unwrap();
        let r = perm_run(&p, &ChainGrowthConfig::default().with_tours(4000)).unwrap();
        assert!((r.partition(1).mean - 4.0).abs() < 1e-9);
        assert!(r.partition(2).covers(16.0 - 1.6, 4.0));
        assert!(r.msd[1].mean == 1.0);
    }

    #[test]
    fn self_avoiding_limit_counts() {
        let p = ModelParams::lattice(2, 1.0, 6).unwrap();
        let r = perm_run(&p, &ChainGrowthConfig::default().with_tours(20_000)).unwrap();
        for (k, c) in [(3usize, 36.0), (4, 100.0), (6, 780.0)] {
            assert!(r.partition(k).covers(c, 4.0), "k={k} {:?}", r.partition(k));
        }
    }

    #[test]
    fn degenerate_configuration_reports_statistics() {
        // d=1 self-avoiding walks are never trapped, but pruning everything kills tours
        let p = ModelParams::lattice(1, 1.0, 30).unwrap();
        let cfg = ChainGrowthConfig {
            tours: 4,
            prune_threshold: 1e6,
            enrich_threshold: 2e6,
            ..Default::default()
        };
        match perm_run(&p, &cfg) {
            Err(Error::DegenerateSampler { tours, target, .. }) => {
                assert_eq!(tours, 4);
                assert_eq!(target, 30);
            }
            other => panic!("expected degenerate sampler, got {other:?}"),
        }
    }

    #[test]
    fn long_walks_stay_in_log_space() {
        let p = ModelParams::lattice(5, 0.5, 10_000).unwrap();
        let cfg = ChainGrowthConfig {
            tours: 64,
            ..Default::default()
        };
        let r = perm_run(&p, &cfg).unwrap();
        let lp = r.log_partition(10_000);
        // c_n lies between (2d-1)^n and (2d)^n
        assert!(lp.mean > 10_000.0 * 9f64.ln() && lp.mean < 10_000.0 * 10f64.ln());
        assert!(r.partition_ratio.iter().all(|e| e.mean.is_finite() && e.mean > 0.0));
    }
}
