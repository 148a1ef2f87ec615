//! Error bars for correlated and independent samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest and largest batch counts accepted by [`batch_means`].
pub const MIN_BATCHES: usize = 32;
pub const MAX_BATCHES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std_error: f64,
    pub n_effective: f64,
}

impl EstimateWithError {
    pub fn exact(value: f64) -> Self {
        EstimateWithError {
            mean: value,
            std_error: 0.0,
            n_effective: 1.0,
        }
    }

    /// Distance to `target` in units of the standard error. Differences at
    /// round-off level count as zero; otherwise zero-error estimates give infinity.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d <= 1e-12 * target.abs().max(self.mean.abs()) {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn covers(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EstimateWithError {
            mean: self.mean * factor,
            std_error: self.std_error * factor.abs(),
            n_effective: self.n_effective,
        }
    }

    /// Inverse-variance pooling of independent estimates of one quantity.
    /// Estimates with zero error dominate; if all have zero error their mean is returned.
    pub fn pool(estimates: &[EstimateWithError]) -> Option<EstimateWithError> {
        if estimates.is_empty() {
            return None;
        }
        let exact: Vec<&EstimateWithError> = estimates.iter().filter(|e| e.std_error == 0.0).collect();
        if !exact.is_empty() {
            let mean = exact.iter().map(|e| e.mean).sum::<f64>() / exact.len() as f64;
            return Some(EstimateWithError {
                mean,
                std_error: 0.0,
                n_effective: estimates.iter().map(|e| e.n_effective).sum(),
            });
        }
        let w: Vec<f64> = estimates.iter().map(|e| 1.0 / (e.std_error * e.std_error)).collect();
        let wsum: f64 = w.iter().sum();
        let mean = estimates.iter().zip(&w).map(|(e, w)| e.mean * w).sum::<f64>() / wsum;
        Some(EstimateWithError {
            mean,
            std_error: wsum.recip().sqrt(),
            n_effective: estimates.iter().map(|e| e.n_effective).sum(),
        })
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two points.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean and standard error of independent samples.
pub fn iid_estimate(xs: &[f64]) -> Result<EstimateWithError> {
    if xs.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let se = (variance(xs) / xs.len() as f64).sqrt();
    Ok(EstimateWithError {
        mean: mean(xs),
        std_error: se,
        n_effective: xs.len() as f64,
    })
}

/// Batch size (a power of two) that leaves between 32 and 64 complete batches,
/// or 1 when the series is too short.
pub fn batch_size_for(len: usize) -> usize {
    let mut b = 1;
    while len / b > MAX_BATCHES {
        b *= 2;
    }
    b
}

/// Means of consecutive complete batches of size `b`.
pub fn rebatch(xs: &[f64], b: usize) -> Vec<f64> {
    xs.chunks_exact(b).map(|c| c.iter().sum::<f64>() / b as f64).collect()
}

/// Batch-means estimate. The batch size doubles until the batch count is in
/// `[32, 64]`. The effective sample size is the ratio of the naive variance
/// of the mean to the batch-means variance, clamped to `[1, len]`.
pub fn batch_means(xs: &[f64]) -> Result<EstimateWithError> {
    if xs.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let b = batch_size_for(xs.len());
    let batches = rebatch(xs, b);
    let m = mean(xs);
    let se = if batches.len() < 2 {
        0.0
    } else {
        (variance(&batches) / batches.len() as f64).sqrt()
    };
    let n = xs.len() as f64;
    let naive = variance(xs);
    let n_effective = if se > 0.0 { (naive / (se * se)).clamp(1.0, n) } else { n };
    Ok(EstimateWithError {
        mean: m,
        std_error: se,
        n_effective,
    })
}

/// Estimate of `Σ num / Σ den` from paired samples, with a linearised batch-means error.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> Result<EstimateWithError> {
    if num.len() != den.len() || num.is_empty() {
        return Err(Error::Precondition("ratio estimate needs equally long nonempty series".into()));
    }
    let dsum: f64 = den.iter().sum();
    if dsum == 0.0 {
        return Err(Error::Precondition("ratio estimate with zero total denominator".into()));
    }
    let r = num.iter().sum::<f64>() / dsum;
    let b = batch_size_for(num.len());
    let nb = rebatch(num, b);
    let db = rebatch(den, b);
    let dmean = mean(&db);
    let resid: Vec<f64> = nb.iter().zip(&db).map(|(n, d)| n - r * d).collect();
    let se = if resid.len() < 2 {
        0.0
    } else {
        (variance(&resid) / resid.len() as f64).sqrt() / dmean.abs()
    };
    Ok(EstimateWithError {
        mean: r,
        std_error: se,
        n_effective: nb.len() as f64 * b as f64,
    })
}

/// Integrated autocorrelation time `1/2 + Σ_t ρ(t)` with a self-consistent
/// window `M >= c τ(M)`, `c = 6`. Returns 0.5 for uncorrelated or constant series.
pub fn integrated_autocorrelation_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 0.5;
    }
    let m = mean(xs);
    let c0 = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for t in 1..n / 2 {
        let ct = xs[..n - t].iter().zip(&xs[t..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / n as f64;
        tau += ct / c0;
        if (t as f64) >= 6.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn batch_counts() {
        assert_eq!(batch_size_for(10), 1);
        assert_eq!(batch_size_for(64), 1);
        assert_eq!(batch_size_for(65), 2);
        for len in [65usize, 100, 1000, 12345, 1 << 20] {
            let b = batch_size_for(len);
            let count = len / b;
            assert!((MIN_BATCHES..=MAX_BATCHES).contains(&count), "{len} -> {count}");
        }
    }

    #[test]
    fn constant_series() {
        let e = batch_means(&[2.5; 1000]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.std_error, 0.0);
        assert!(e.n_effective >= 1.0);
        assert_eq!(integrated_autocorrelation_time(&[1.0; 100]), 0.5);
        assert!(batch_means(&[]).is_err());
    }

    #[test]
    fn iid_uniform_error_bar() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..1 << 16).map(|_| rng.gen::<f64>()).collect();
        let e = batch_means(&xs).unwrap();
        let exact_se = (1.0f64 / 12.0 / xs.len() as f64).sqrt();
        assert!((e.std_error / exact_se - 1.0).abs() < 0.4);
        assert!(e.covers(0.5, 4.0));
        let tau = integrated_autocorrelation_time(&xs);
        assert!(tau < 0.7, "{tau}");
    }

    #[test]
    fn ar1_autocorrelation() {
        // x_t = a x_{t-1} + noise has τ_int = (1 + a) / (2 (1 - a))
        let a = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = a * x + rng.gen::<f64>() - 0.5;
                x
            })
            .collect();
        let tau = integrated_autocorrelation_time(&xs);
        assert!((tau - 4.5).abs() < 0.6, "{tau}");
        let e = batch_means(&xs).unwrap();
        assert!(e.n_effective < xs.len() as f64 / 4.0);
    }

    #[test]
    fn ratio_of_proportional_series() {
        let den: Vec<f64> = (1..=500).map(|i| i as f64).collect();
        let num: Vec<f64> = den.iter().map(|d| 3.0 * d).collect();
        let e = ratio_estimate(&num, &den).unwrap();
        assert!((e.mean - 3.0).abs() < 1e-12);
        assert!(e.std_error < 1e-12);
    }

    #[test]
    fn pooling() {
        let a = EstimateWithError {
            mean: 1.0,
            std_error: 1.0,
            n_effective: 10.0,
        };
        let b = EstimateWithError {
            mean: 3.0,
            std_error: 1.0,
            n_effective: 10.0,
        };
        let p = EstimateWithError::pool(&[a, b]).unwrap();
        assert!((p.mean - 2.0).abs() < 1e-15);
        assert!((p.std_error - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(EstimateWithError::exact(4.0).z_score(4.0), 0.0);
        assert!(EstimateWithError::exact(4.0).z_score(4.5).is_infinite());
    }
}
