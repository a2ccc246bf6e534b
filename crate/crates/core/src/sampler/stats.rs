//! Batch-means error bars.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Fewest batches an estimate is ever computed from.
pub const MIN_BATCHES: usize = 20;

/// Batch size doubles until the lag-1 autocorrelation of batch means drops below this.
pub const BATCH_AUTOCORRELATION_TARGET: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateWithError {
    pub mean: f64,
    pub stderr: f64,
    pub batches: usize,
    pub batch_size: usize,
    /// Statistical inefficiency in units of recorded samples: `batch_size * Var(batch mean) / Var(sample)`.
    pub autocorrelation_time: f64,
    /// Lag-1 autocorrelation of the final batch means.
    pub batch_autocorrelation: f64,
    /// Set when the batch autocorrelation never fell below the target, or the burn-in
    /// was shorter than ten autocorrelation times.
    pub warning: bool,
}

impl EstimateWithError {
    /// Whether `value` lies within `k` standard errors.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn lag_one(xs: &[f64]) -> f64 {
    let (mean, var) = mean_var(xs);
    if !(var > 0.0) {
        return 0.0;
    }
    let n = xs.len() as f64;
    let cov = xs
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum::<f64>()
        / (n - 1.0);
    cov / var
}

/// Batch means over a time series, doubling the batch size until the batch means decorrelate.
pub fn batch_means(series: &[f64]) -> Result<EstimateWithError> {
    if series.len() < MIN_BATCHES {
        return Err(Error::param(
            "series",
            alloc::format!("need at least {MIN_BATCHES} samples, got {}", series.len()),
        ));
    }
    let (mean, var) = mean_var(series);
    let mut size = 1;
    loop {
        let batches = series.len() / size;
        let means: Vec<f64> = series
            .chunks_exact(size)
            .take(batches)
            .map(|c| c.iter().sum::<f64>() / size as f64)
            .collect();
        let r1 = lag_one(&means);
        let resolved = r1 < BATCH_AUTOCORRELATION_TARGET;
        if resolved || batches / 2 < MIN_BATCHES {
            let (_, var_b) = mean_var(&means);
            let tau = if var > 0.0 {
                size as f64 * var_b / var
            } else {
                1.0
            };
            return Ok(EstimateWithError {
                mean,
                stderr: sqrt(var_b / batches as f64),
                batches,
                batch_size: size,
                autocorrelation_time: tau,
                batch_autocorrelation: r1,
                warning: !resolved,
            });
        }
        size *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn independent_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..40_000).map(|_| rng.random::<f64>()).collect();
        let e = batch_means(&xs).unwrap();
        assert!(e.agrees_with(0.5, 4.0));
        assert!((e.stderr - sqrt(1.0 / 12.0 / 40_000.0)).abs() < 0.2 * e.stderr);
        assert!(!e.warning);
        assert!(e.batches >= MIN_BATCHES);
    }

    #[test]
    fn correlated_samples_grow_batches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.95 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let e = batch_means(&xs).unwrap();
        assert!(e.batch_size >= 32);
        // Statistical inefficiency of an AR(1) chain: (1 + rho) / (1 - rho) = 39.
        assert!(
            e.autocorrelation_time > 25.0 && e.autocorrelation_time < 55.0,
            "{}",
            e.autocorrelation_time
        );
    }

    #[test]
    fn constant_and_short_series() {
        let e = batch_means(&[2.0; 64]).unwrap();
        assert_eq!((e.mean, e.stderr), (2.0, 0.0));
        assert!(batch_means(&[1.0; 10]).is_err());
    }
}
