use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Point estimate with a normal-approximation confidence interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub n_samples: usize,
}

impl EstimateCI {
    pub fn normal(value: f64, std_error: f64, confidence: f64, n_samples: usize) -> Result<Self> {
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::arg(format!("confidence {confidence} outside (0, 1)")));
        }
        let se = std_error.max(0.0);
        let half = z_score(confidence) * se;
        Ok(EstimateCI {
            value,
            std_error: se,
            ci_low: value - half,
            ci_high: value + half,
            confidence,
            n_samples,
        })
    }

    /// Like [`normal`](Self::normal) but clamps the interval to `[lo, hi]`,
    /// for probabilities.
    pub fn clamped(mut self, lo: f64, hi: f64) -> Self {
        self.ci_low = self.ci_low.max(lo);
        self.ci_high = self.ci_high.min(hi);
        self
    }
}

/// Two-sided standard-normal quantile for `confidence`.
pub fn z_score(confidence: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + 0.5 * confidence)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().total() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: CompensatedSum = xs.iter().map(|x| (x - m) * (x - m)).collect();
    ss.total() / (xs.len() - 1) as f64
}

/// Mean of a chain-ordered series and its batch-means standard error.
///
/// Each chain (consecutive runs of `chain_lengths`) is cut into batches of
/// `⌊√(N / chains)⌋` draws; a trailing partial batch is dropped from the
/// variance estimate but not from the mean. Falls back to the iid standard
/// error when fewer than two batches exist.
pub fn batch_means(values: &[f64], chain_lengths: &[usize]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::arg("no samples"));
    }
    let total: usize = chain_lengths.iter().sum();
    if total != values.len() {
        return Err(Error::arg("chain lengths do not cover the series"));
    }
    let m = mean(values);
    let per_chain = (total / chain_lengths.len().max(1)).max(1);
    let b = ((per_chain as f64).sqrt().floor() as usize).max(1);
    let mut batch = Vec::new();
    let mut offset = 0;
    for &len in chain_lengths {
        let chain = &values[offset..offset + len];
        batch.extend(chain.chunks_exact(b).map(mean));
        offset += len;
    }
    let se = if batch.len() >= 2 {
        (sample_variance(&batch) / batch.len() as f64).sqrt()
    } else {
        (sample_variance(values) / values.len() as f64).sqrt()
    };
    Ok((m, se))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_for_99_percent() {
        assert!((z_score(0.99) - 2.5758293035489).abs() < 1e-9);
        assert!((z_score(0.95) - 1.959963984540).abs() < 1e-9);
    }

    #[test]
    fn interval_contains_value() {
        let e = EstimateCI::normal(1.0, 0.1, 0.99, 10).unwrap();
        assert!(e.ci_low <= e.value && e.value <= e.ci_high);
        assert!(EstimateCI::normal(1.0, 0.1, 1.0, 10).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.total(), 1000.0);
    }

    #[test]
    fn batch_means_on_constant_series() {
        let v = vec![0.5; 100];
        let (m, se) = batch_means(&v, &[100]).unwrap();
        assert_eq!(m, 0.5);
        assert_eq!(se, 0.0);
        assert!(batch_means(&[], &[]).is_err());
        assert!(batch_means(&v, &[50]).is_err());
    }

    #[test]
    fn batch_means_inflates_for_correlated_series() {
        // Long constant runs: the iid formula badly underestimates.
        let v: Vec<f64> = (0..10_000).map(|i| ((i / 500) % 2) as f64).collect();
        let (_, se) = batch_means(&v, &[10_000]).unwrap();
        let iid = (sample_variance(&v) / v.len() as f64).sqrt();
        assert!(se > 3.0 * iid);
    }
}
