//! m-spacing estimate of one-dimensional differential entropy (natural log).
//!
//! With order statistics `X_(1) ≤ … ≤ X_(N)` and `m = ⌊√N⌋`, the Vasicek
//! estimator averages `log((N / 2m)(X_(i+m) − X_(i−m)))`, indices clamped to
//! `[1, N]`. For a uniform law the spacing over `k` gaps has
//! `E log = ψ(k) − ψ(N+1) + log L`, so subtracting that offset term by term
//! gives an estimator that is exactly unbiased for uniform data and
//! asymptotically equivalent to Vasicek's otherwise:
//!
//! `H = ψ(N+1) + (1/N) Σ_i [log(X_(i+m) − X_(i−m)) − ψ(k_i)]`.

use statrs::function::gamma::digamma;

use super::stats::{sample_variance, CompensatedSum, EstimateCI, DEFAULT_CONFIDENCE};
use crate::error::{Error, Result};

pub const MIN_ENTROPY_SAMPLES: usize = 100;

fn spacing_entropy(sorted: &[f64]) -> Result<f64> {
    let n = sorted.len();
    let m = ((n as f64).sqrt().floor() as usize).max(1);
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        let hi = (i + m).min(n - 1);
        let lo = i.saturating_sub(m);
        let spacing = sorted[hi] - sorted[lo];
        if spacing <= 0.0 {
            return Err(Error::arg("samples contain a run of repeated values"));
        }
        acc.add(spacing.ln() - digamma((hi - lo) as f64));
    }
    Ok(digamma(n as f64 + 1.0) + acc.total() / n as f64)
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("samples must be finite"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Entropy estimate of `samples`. The standard error comes from ten
/// contiguous blocks (fewer for short inputs): the spread of the block
/// estimates divided by `√blocks`, so chain-ordered input is handled like
/// batch means.
pub fn entropy_1d(samples: &[f64]) -> Result<EstimateCI> {
    let n = samples.len();
    if n < MIN_ENTROPY_SAMPLES {
        return Err(Error::arg(format!(
            "entropy estimate needs at least {MIN_ENTROPY_SAMPLES} samples, got {n}"
        )));
    }
    let value = spacing_entropy(&sorted(samples)?)?;
    let blocks = (n / MIN_ENTROPY_SAMPLES).clamp(2, 10);
    let size = n / blocks;
    let block_values = samples
        .chunks_exact(size)
        .take(blocks)
        .map(|b| sorted(b).and_then(|s| spacing_entropy(&s)))
        .collect::<Result<Vec<_>>>()?;
    let se = (sample_variance(&block_values) / blocks as f64).sqrt();
    EstimateCI::normal(value, se, DEFAULT_CONFIDENCE, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::chain_rng;
    use rand::Rng;

    fn uniform(len: usize, width: f64, seed: u64) -> Vec<f64> {
        let mut rng = chain_rng(seed, 0);
        (0..len).map(|_| width * rng.random::<f64>()).collect()
    }

    #[test]
    fn uniform_intervals() {
        let e = entropy_1d(&uniform(100_000, 2.0, 1)).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 0.01, "{e:?}");
        let e = entropy_1d(&uniform(100_000, 1.0, 2)).unwrap();
        assert!(e.value.abs() < 0.01, "{e:?}");
    }

    #[test]
    fn consistent_within_two_standard_errors() {
        for (i, width) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            let e = entropy_1d(&uniform(50_000, width, 10 + i as u64)).unwrap();
            assert!(
                (e.value - width.ln()).abs() <= 2.0 * e.std_error,
                "L = {width}: {e:?}"
            );
        }
    }

    #[test]
    fn gaussian_entropy() {
        // H(N(0,1)) = ½ log(2πe).
        let mut rng = chain_rng(4, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let e = entropy_1d(&xs).unwrap();
        let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((e.value - exact).abs() < 0.02, "{e:?}");
    }

    #[test]
    fn too_few_samples() {
        assert!(entropy_1d(&uniform(99, 1.0, 1)).is_err());
        assert!(entropy_1d(&vec![1.0; 200]).is_err());
    }
}
