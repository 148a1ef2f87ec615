//! Statistical checks of the diffusive scaling of walk samples.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::{enumerate_with, EnumerationOptions, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};
use crate::lattice::{torus_rep, Ambient, MAX_DIM};
use crate::metropolis::{MetropolisConfig, PathSampler};
use crate::params::ModelParams;
use crate::path::rescale;
use crate::perm::{perm_run, ChainGrowthConfig};
use crate::walk::Walk;

/// Block times `0 = t_0 < ... < t_N`, one frequency per block, and the time scale `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementSpec {
    pub times: Vec<f64>,
    pub frequencies: Vec<Vec<f64>>,
    pub k: f64,
}

impl IncrementSpec {
    pub fn new(times: Vec<f64>, frequencies: Vec<Vec<f64>>, k: f64) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::InvalidParameter("increment times must start at 0 and contain at least one block".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("increment times must be strictly increasing".into()));
        }
        if frequencies.len() != times.len() - 1 {
            return Err(Error::InvalidParameter(format!(
                "{} blocks need {} frequencies, got {}",
                times.len() - 1,
                times.len() - 1,
                frequencies.len()
            )));
        }
        let dim = frequencies[0].len();
        if dim == 0 || frequencies.iter().any(|u| u.len() != dim || u.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidParameter("frequencies must be finite vectors of one common dimension".into()));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("time scale k must be positive, got {k}")));
        }
        Ok(IncrementSpec { times, frequencies, k })
    }

    pub fn blocks(&self) -> usize {
        self.frequencies.len()
    }

    pub fn dim(&self) -> usize {
        self.frequencies[0].len()
    }

    /// Walk times `⌊t_j k⌋`.
    pub fn walk_times(&self) -> Vec<usize> {
        self.times.iter().map(|t| (t * self.k + 1e-9).floor() as usize).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.frequencies.iter().all(|u| u.iter().all(|&c| c == 0.0))
    }
}

/// Characteristic function of Brownian increments with `E|B_1|² = 1` per unit `D`:
/// `exp(-(1/2d) Σ_j |u_j|² (t_j - t_{j-1}))`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianReference;

impl GaussianReference {
    pub fn value(&self, spec: &IncrementSpec) -> f64 {
        let d = spec.dim() as f64;
        let s: f64 = spec
            .frequencies
            .iter()
            .zip(spec.times.windows(2))
            .map(|(u, w)| u.iter().map(|c| c * c).sum::<f64>() * (w[1] - w[0]))
            .sum();
        (-s / (2.0 * d)).exp()
    }
}

/// Frequencies along the first axis and the main diagonal with `|u| ∈ {1/2, 1, 2}`,
/// on `blocks` equal blocks of `[0, 1]`, in three block patterns: the same `u`
/// on every block, alternating signs, and `u` on the first block only.
pub fn standard_frequency_grid(dim: usize, blocks: usize, k: f64) -> Result<Vec<IncrementSpec>> {
    if dim == 0 || dim > MAX_DIM || blocks == 0 {
        return Err(Error::InvalidParameter(format!("grid needs 1 <= dim <= {MAX_DIM} and at least one block")));
    }
    let times: Vec<f64> = (0..=blocks).map(|j| j as f64 / blocks as f64).collect();
    let mut axis = vec![0.0; dim];
    axis[0] = 1.0;
    let diag = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut grid = Vec::new();
    for dir in [&axis, &diag] {
        if dim == 1 && std::ptr::eq(dir, &diag) {
            continue;
        }
        for mag in [0.5, 1.0, 2.0] {
            let u: Vec<f64> = dir.iter().map(|c| c * mag).collect();
            let neg: Vec<f64> = u.iter().map(|c| -c).collect();
            let zero = vec![0.0; dim];
            let mut patterns = vec![vec![u.clone(); blocks]];
            if blocks > 1 {
                patterns.push((0..blocks).map(|j| if j % 2 == 0 { u.clone() } else { neg.clone() }).collect());
                patterns.push((0..blocks).map(|j| if j == 0 { u.clone() } else { zero.clone() }).collect());
            }
            for freqs in patterns {
                grid.push(IncrementSpec::new(times.clone(), freqs, k)?);
            }
        }
    }
    Ok(grid)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FddEstimator {
    /// `exp(i θ)` per sample.
    Plain,
    /// Average of `exp(i θ)` over all coordinate sign flips and cyclic
    /// coordinate shifts applied jointly to every block. The walk measure is
    /// invariant under these maps, so the expectation is unchanged.
    Symmetrized,
}

/// Empirical characteristic functions of rescaled increments against the
/// Gaussian reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FddResult {
    pub means: Vec<Complex64>,
    /// Standard error of each mean (real and imaginary parts combined).
    pub std_errors: Vec<f64>,
    pub references: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Largest entry of `deviations`.
    pub deviation: f64,
    pub samples: usize,
}

/// Streaming form of [`fdd_statistic`].
#[derive(Clone, Debug)]
pub struct FddAccumulator {
    dim: usize,
    grid: Vec<IncrementSpec>,
    walk_times: Vec<Vec<usize>>,
    scale: f64,
    estimator: FddEstimator,
    sum: Vec<Complex64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl FddAccumulator {
    /// `n` is the walk length of every sample to be added.
    pub fn new(grid: &[IncrementSpec], d_hat: f64, n: usize, estimator: FddEstimator) -> Result<Self> {
        if !(d_hat > 0.0 && d_hat.is_finite()) {
            return Err(Error::InvalidParameter(format!("D_hat must be positive, got {d_hat}")));
        }
        let first = grid.first().ok_or_else(|| Error::InvalidParameter("empty frequency grid".into()))?;
        let dim = first.dim();
        if grid.iter().any(|s| s.dim() != dim || s.k != first.k) {
            return Err(Error::InvalidParameter("grid entries must share dimension and time scale".into()));
        }
        let walk_times: Vec<Vec<usize>> = grid.iter().map(|s| s.walk_times()).collect();
        if let Some(t) = walk_times.iter().flatten().find(|&&t| t > n) {
            return Err(Error::Precondition(format!("increment time {t} exceeds walk length {n}")));
        }
        Ok(FddAccumulator {
            dim,
            grid: grid.to_vec(),
            walk_times,
            scale: 1.0 / (d_hat * first.k).sqrt(),
            estimator,
            sum: vec![Complex64::new(0.0, 0.0); grid.len()],
            sum_sq: vec![0.0; grid.len()],
            count: 0,
        })
    }

    /// Adds one sample given by its position function `k ↦ ω(k)`.
    pub fn add_with<F: Fn(usize) -> [i32; MAX_DIM]>(&mut self, position: F) {
        let d = self.dim;
        let mut cache: BTreeMap<usize, [i32; MAX_DIM]> = BTreeMap::new();
        for (g, spec) in self.grid.iter().enumerate() {
            let times = &self.walk_times[g];
            // scaled increments a[j][c]
            let mut incs: Vec<[f64; MAX_DIM]> = Vec::with_capacity(spec.blocks());
            for j in 0..spec.blocks() {
                let a = *cache.entry(times[j]).or_insert_with(|| position(times[j]));
                let b = *cache.entry(times[j + 1]).or_insert_with(|| position(times[j + 1]));
                let mut inc = [0.0; MAX_DIM];
                for c in 0..d {
                    inc[c] = (b[c] - a[c]) as f64 * self.scale;
                }
                incs.push(inc);
            }
            let value = match self.estimator {
                FddEstimator::Plain => {
                    let theta: f64 = spec.frequencies.iter().zip(&incs).map(|(u, x)| (0..d).map(|c| u[c] * x[c]).sum::<f64>()).sum();
                    Complex64::from_polar(1.0, theta)
                }
                FddEstimator::Symmetrized => {
                    // sign flips average exp(iΣ_c a_c) to Π_c cos(a_c)
                    let mut acc = 0.0;
                    for shift in 0..d {
                        let mut prod = 1.0;
                        for c in 0..d {
                            let uc = (c + shift) % d;
                            let a: f64 = spec.frequencies.iter().zip(&incs).map(|(u, x)| u[uc] * x[c]).sum();
                            prod *= a.cos();
                        }
                        acc += prod;
                    }
                    Complex64::new(acc / d as f64, 0.0)
                }
            };
            self.sum[g] += value;
            self.sum_sq[g] += value.norm_sqr();
        }
        self.count += 1;
    }

    /// Adds a Z^d walk.
    pub fn add_walk(&mut self, w: &Walk) -> Result<()> {
        if w.ambient() != Ambient::Lattice || w.dim() != self.dim {
            return Err(Error::Precondition("fdd samples must be Z^d walks of the grid's dimension".into()));
        }
        if self.walk_times.iter().flatten().any(|&t| t > w.len()) {
            return Err(Error::Precondition(format!("walk of length {} is too short for the grid", w.len())));
        }
        let dim = self.dim;
        self.add_with(|k| {
            let mut x = [0; MAX_DIM];
            x[..dim].copy_from_slice(w.position(k));
            x
        });
        Ok(())
    }

    pub fn merge(&mut self, other: &FddAccumulator) {
        for g in 0..self.sum.len() {
            self.sum[g] += other.sum[g];
            self.sum_sq[g] += other.sum_sq[g];
        }
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> Result<FddResult> {
        if self.count == 0 {
            return Err(Error::Precondition("no samples".into()));
        }
        let n = self.count as f64;
        let means: Vec<Complex64> = self.sum.iter().map(|s| s / n).collect();
        let std_errors = means
            .iter()
            .zip(&self.sum_sq)
            .map(|(m, sq)| {
                if self.count < 2 {
                    0.0
                } else {
                    ((sq / n - m.norm_sqr()).max(0.0) * n / (n - 1.0) / n).sqrt()
                }
            })
            .collect();
        let references: Vec<f64> = self.grid.iter().map(|s| GaussianReference.value(s)).collect();
        let deviations: Vec<f64> = means.iter().zip(&references).map(|(m, r)| (m - r).norm()).collect();
        let deviation = deviations.iter().copied().fold(0.0, f64::max);
        Ok(FddResult {
            means,
            std_errors,
            references,
            deviations,
            deviation,
            samples: self.count,
        })
    }
}

/// Empirical `E exp(i Σ_j u_j · (ω(⌊t_j k⌋) - ω(⌊t_{j-1} k⌋)) / √(D_hat k))`
/// per grid entry, and its largest deviation from the Gaussian reference.
pub fn fdd_statistic(paths: &[Walk], grid: &[IncrementSpec], d_hat: f64) -> Result<FddResult> {
    fdd_statistic_with(paths, grid, d_hat, FddEstimator::Plain)
}

pub fn fdd_statistic_with(paths: &[Walk], grid: &[IncrementSpec], d_hat: f64, estimator: FddEstimator) -> Result<FddResult> {
    let n = paths
        .iter()
        .map(|w| w.len())
        .min()
        .ok_or_else(|| Error::Precondition("no sample paths".into()))?;
    let mut acc = FddAccumulator::new(grid, d_hat, n, estimator)?;
    for w in paths {
        acc.add_walk(w)?;
    }
    acc.finish()
}

/// [`fdd_statistic_with`] on `samples` snapshots drawn by `cfg.chains`
/// parallel Metropolis chains, without storing the walks.
pub fn fdd_sampled(
    params: &ModelParams,
    cfg: &MetropolisConfig,
    samples: usize,
    grid: &[IncrementSpec],
    d_hat: f64,
    estimator: FddEstimator,
) -> Result<FddResult> {
    if params.ambient() != Ambient::Lattice {
        return Err(Error::Precondition("fdd samples must come from the Z^d measure".into()));
    }
    let template = FddAccumulator::new(grid, d_hat, params.n, estimator)?;
    cfg.validate(params)?;
    let chains = cfg.chains.min(samples.max(1));
    let parts: Vec<Result<FddAccumulator>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let share = samples / chains + usize::from(c < samples % chains);
            let mut acc = template.clone();
            let mut sampler = PathSampler::new(params, cfg, c as u64)?;
            for _ in 0..share {
                let chain = sampler.advance();
                acc.add_with(|k| chain.relative_position(k));
            }
            Ok(acc)
        })
        .collect();
    let mut total = template;
    for p in parts {
        total.merge(&p?);
    }
    total.finish()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionFit {
    pub d_hat: f64,
    pub window: (usize, usize),
    /// Largest relative deviation of the data from `d_hat · n` in the window.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares slope through the origin of `E|ω(n)|²` against `n` on the window.
pub fn diffusion_fit(msd_by_n: &BTreeMap<usize, f64>, window: (usize, usize)) -> Result<DiffusionFit> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty window [{lo}, {hi}]")));
    }
    let pts: Vec<(f64, f64)> = msd_by_n.range(lo..=hi).filter(|(&n, _)| n > 0).map(|(&n, &m)| (n as f64, m)).collect();
    if pts.len() < 2 {
        return Err(Error::Precondition(format!(
            "diffusion fit needs at least 2 points in [{lo}, {hi}], got {}",
            pts.len()
        )));
    }
    let sxy: f64 = pts.iter().map(|(n, m)| n * m).sum();
    let sxx: f64 = pts.iter().map(|(n, _)| n * n).sum();
    let d_hat = sxy / sxx;
    if !(d_hat > 0.0) {
        return Err(Error::Precondition(format!("fitted diffusion constant {d_hat} is not positive")));
    }
    let residual = pts.iter().map(|(n, m)| ((m - d_hat * n) / (d_hat * n)).abs()).fold(0.0, f64::max);
    Ok(DiffusionFit {
        d_hat,
        window,
        residual,
        points: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessPair {
    pub s: f64,
    pub t: f64,
    pub mean_sq: f64,
    pub ratio: f64,
    /// `⌊r² s⌋ = ⌊r² t⌋`: both times fall in one interpolation cell.
    pub same_cell: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessResult {
    pub a_hat: f64,
    pub pairs: Vec<TightnessPair>,
}

/// `A_hat = max over pairs of E|Y_t - Y_s|² / |t - s|` with `Y = rescale(ω, r)`.
/// Pairs with `s = t` are skipped.
pub fn tightness_check(paths: &[Walk], r: u32, grid: &[(f64, f64)]) -> Result<TightnessResult> {
    let n = paths
        .iter()
        .map(|w| w.len())
        .min()
        .ok_or_else(|| Error::Precondition("no sample paths".into()))?;
    if r == 0 {
        return Err(Error::InvalidParameter("scale r must be at least 1".into()));
    }
    let end = n as f64 / (r as f64 * r as f64);
    if let Some(&(s, t)) = grid
        .iter()
        .find(|&&(s, t)| !(0.0..=end + 1e-12).contains(&s) || !(0.0..=end + 1e-12).contains(&t))
    {
        return Err(Error::Precondition(format!("grid pair ({s}, {t}) outside [0, {end}]")));
    }
    let pairs: Vec<(f64, f64)> = grid
        .iter()
        .copied()
        .filter(|(s, t)| s != t)
        .map(|(s, t)| if s < t { (s, t) } else { (t, s) })
        .collect();
    let mut sums = vec![0.0; pairs.len()];
    for w in paths {
        let y = rescale(w, r)?;
        for (i, &(s, t)) in pairs.iter().enumerate() {
            let (a, b) = (y.evaluate(s)?, y.evaluate(t)?);
            sums[i] += a.iter().zip(&b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>();
        }
    }
    let r2 = r as f64 * r as f64;
    let out: Vec<TightnessPair> = pairs
        .iter()
        .zip(&sums)
        .map(|(&(s, t), &sum)| {
            let mean_sq = sum / paths.len() as f64;
            TightnessPair {
                s,
                t,
                mean_sq,
                ratio: mean_sq / (t - s),
                same_cell: (r2 * s).floor() == (r2 * t).floor(),
            }
        })
        .collect();
    let a_hat = out.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(TightnessResult { a_hat, pairs: out })
}

/// All pairs from `{0, 1/m, ..., 1} · horizon`.
pub fn uniform_time_pairs(horizon: f64, m: usize) -> Vec<(f64, f64)> {
    let ts: Vec<f64> = (0..=m).map(|j| horizon * j as f64 / m as f64).collect();
    let mut out = Vec::new();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            out.push((ts[i], ts[j]));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiluteConfig {
    pub dim: usize,
    pub beta: f64,
    pub r: u32,
    pub lengths: Vec<usize>,
    /// Lengths up to this are enumerated exactly; longer ones use chain growth.
    pub exact_max_n: usize,
    pub perm: ChainGrowthConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiluteRow {
    pub n: usize,
    pub r: u32,
    pub ratio: f64,
    pub std_error: f64,
    /// `β (n^{-(d-4)/2} + n² / V)`.
    pub shape: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiluteTable {
    pub rows: Vec<DiluteRow>,
    /// Smallest `C` with `|ratio - 1| <= C · shape` on every row.
    pub c_fit: f64,
}

impl DiluteTable {
    pub fn bound_holds(&self, c: f64) -> bool {
        self.rows.iter().all(|row| (row.ratio - 1.0).abs() <= c * row.shape)
    }
}

pub fn correction_shape(dim: usize, beta: f64, n: usize, volume: f64) -> f64 {
    let n = n as f64;
    beta * (n.powf(-(dim as f64 - 4.0) / 2.0) + n * n / volume)
}

/// `c_n^T / c_n` tabulated against the dilute correction shape.
pub fn dilute_ratio_experiment(cfg: &DiluteConfig) -> Result<DiluteTable> {
    let mut rows = Vec::with_capacity(cfg.lengths.len());
    for &n in &cfg.lengths {
        let lattice = ModelParams::lattice(cfg.dim, cfg.beta, n)?;
        let torus = ModelParams::torus(cfg.dim, cfg.beta, cfg.r, n)?;
        let volume = torus.volume().expect("torus volume");
        let shape = correction_shape(cfg.dim, cfg.beta, n, volume);
        let row = if n <= cfg.exact_max_n {
            let opts = EnumerationOptions {
                node_budget: DEFAULT_NODE_BUDGET,
                ..EnumerationOptions::counts_only()
            };
            let c = enumerate_with(&lattice, &opts)?.c_n;
            let ct = enumerate_with(&torus, &opts)?.c_n;
            DiluteRow {
                n,
                r: cfg.r,
                ratio: ct / c,
                std_error: 0.0,
                shape,
                exact: true,
            }
        } else {
            let a = perm_run(&lattice, &cfg.perm)?.log_partition(n);
            let b = perm_run(&torus, &cfg.perm)?.log_partition(n);
            let ratio = (b.mean - a.mean).exp();
            let se = ratio * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            DiluteRow {
                n,
                r: cfg.r,
                ratio,
                std_error: se,
                shape,
                exact: false,
            }
        };
        rows.push(row);
    }
    let c_fit = rows
        .iter()
        .map(|row| if row.shape > 0.0 { (row.ratio - 1.0).abs() / row.shape } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(DiluteTable { rows, c_fit })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateRow {
    pub n: usize,
    pub r: u32,
    pub probability: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Empirical `P(max_{1<=k<=n} |ω(k)| / r > ε)` under the torus measure, with
/// `ω(k)` the representative in `[-r/2, r/2)^d`.
pub fn degenerate_regime_check(
    dim: usize,
    beta: f64,
    pairs: &[(usize, u32)],
    epsilon: f64,
    samples: usize,
    cfg: &MetropolisConfig,
) -> Result<Vec<DegenerateRow>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for (i, &(n, r)) in pairs.iter().enumerate() {
        let params = ModelParams::torus(dim, beta, r, n)?;
        let mut sampler = PathSampler::new(&params, cfg, i as u64)?;
        let threshold = epsilon * r as f64;
        let mut hits = 0usize;
        for _ in 0..samples {
            let chain = sampler.advance();
            let sup = (1..=n)
                .map(|k| {
                    let x = chain.relative_position(k);
                    x[..dim].iter().map(|&c| (torus_rep(c, r) as f64).powi(2)).sum::<f64>()
                })
                .fold(0.0, f64::max)
                .sqrt();
            hits += usize::from(sup > threshold);
        }
        let p = hits as f64 / samples as f64;
        rows.push(DegenerateRow {
            n,
            r,
            probability: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increment_spec_validation() {
        assert!(IncrementSpec::new(vec![0.0], vec![], 10.0).is_err());
        assert!(IncrementSpec::new(vec![0.0, 0.5, 0.5], vec![vec![1.0], vec![1.0]], 10.0).is_err());
        assert!(IncrementSpec::new(vec![0.1, 0.5], vec![vec![1.0]], 10.0).is_err());
        assert!(IncrementSpec::new(vec![0.0, 0.5], vec![vec![1.0]], 0.0).is_err());
        let s = IncrementSpec::new(vec![0.0, 0.5, 1.0], vec![vec![1.0, 0.0], vec![0.0, 2.0]], 50.0).unwrap();
        assert_eq!(s.walk_times(), vec![0, 25, 50]);
        // |u1|²·0.5 + |u2|²·0.5 = 2.5 → exp(-2.5/4)
        assert!((GaussianReference.value(&s) - (-0.625f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn grid_shape() {
        assert_eq!(standard_frequency_grid(5, 1, 100.0).unwrap().len(), 6);
        assert_eq!(standard_frequency_grid(5, 2, 100.0).unwrap().len(), 18);
        assert_eq!(standard_frequency_grid(1, 3, 100.0).unwrap().len(), 9);
        for s in standard_frequency_grid(4, 3, 10.0).unwrap() {
            let r = GaussianReference.value(&s);
            assert!(r > 0.0 && r <= 1.0);
        }
    }

    #[test]
    fn zero_frequencies_give_exact_one() {
        let spec = IncrementSpec::new(vec![0.0, 0.5, 1.0], vec![vec![0.0; 2]; 2], 8.0).unwrap();
        let walks: Vec<Walk> = (0..5).map(|_| Walk::straight(2, Ambient::Lattice, 8).unwrap()).collect();
        for est in [FddEstimator::Plain, FddEstimator::Symmetrized] {
            let r = fdd_statistic_with(&walks, std::slice::from_ref(&spec), 1.0, est).unwrap();
            assert_eq!(r.means[0], Complex64::new(1.0, 0.0));
            assert_eq!(r.deviation, 0.0);
        }
        assert!(fdd_statistic(&walks, std::slice::from_ref(&spec), 0.0).is_err());
        assert!(fdd_statistic(&walks[..0], &[spec], 1.0).is_err());
    }

    #[test]
    fn diffusion_fit_cases() {
        let exact: BTreeMap<usize, f64> = (1..=50).map(|n| (n, n as f64)).collect();
        let f = diffusion_fit(&exact, (25, 50)).unwrap();
        assert!((f.d_hat - 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(diffusion_fit(&exact, (60, 70)).is_err());
        assert!(diffusion_fit(&exact, (10, 5)).is_err());
        let one: BTreeMap<usize, f64> = [(10, 10.0)].into_iter().collect();
        assert!(diffusion_fit(&one, (0, 100)).is_err());
    }

    #[test]
    fn tightness_skips_equal_times() {
        let walks: Vec<Walk> = (0..3).map(|_| Walk::straight(1, Ambient::Lattice, 16).unwrap()).collect();
        let t = tightness_check(&walks, 4, &[(0.5, 0.5), (0.0, 1.0)]).unwrap();
        assert_eq!(t.pairs.len(), 1);
        // straight rod: |Y_1 - Y_0|² = (16/4)² = 16 over |t - s| = 1
        assert!((t.a_hat - 16.0).abs() < 1e-12);
        assert!(tightness_check(&walks, 4, &[(0.0, 2.0)]).is_err());
    }

    #[test]
    fn dilute_trivial_cases() {
        let cfg = DiluteConfig {
            dim: 2,
            beta: 0.0,
            r: 3,
            lengths: vec![3, 5],
            exact_max_n: 8,
            perm: ChainGrowthConfig::default(),
        };
        let t = dilute_ratio_experiment(&cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.ratio == 1.0));
        let cfg = DiluteConfig {
            dim: 3,
            beta: 0.3,
            r: 11,
            lengths: vec![2, 4, 5],
            ..cfg
        };
        let t = dilute_ratio_experiment(&cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.ratio == 1.0));
        assert_eq!(t.c_fit, 0.0);
    }

    #[test]
    fn degenerate_single_step() {
        let cfg = MetropolisConfig {
            sweeps: 50,
            thermalization: 10,
            ..Default::default()
        };
        let rows = degenerate_regime_check(3, 0.1, &[(1, 50)], 0.03, 200, &cfg).unwrap();
        assert_eq!(rows[0].probability, 0.0);
    }
}
