//! Distance-distribution probabilities on sampled batches.

use serde::Serialize;

use super::stats::{batch_means, EstimateCI, DEFAULT_CONFIDENCE};
use crate::error::{Error, Result};
use crate::exactvol::{self, RationalHalfspace, RationalPolytope, Q};
use crate::sampler::SampleBatch;

/// Exponent `c` in the minimum-distance threshold `1 − n^{−c}`.
pub const DEFAULT_MIN_DISTANCE_EXPONENT: f64 = 1.0 / 30.0;

pub fn min_distance_threshold(n: usize, c: f64) -> f64 {
    1.0 - (n as f64).powf(-c)
}

fn check_full_box(n: usize, batch: &SampleBatch) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::arg("empty sample batch"));
    }
    if batch.n() != n {
        return Err(Error::arg(format!("batch has n = {}, expected {n}", batch.n())));
    }
    let cfg = batch.config();
    if cfg.box_low != 0.0 || cfg.box_high != 2.0 {
        return Err(Error::arg("batch must be drawn from the full box [0, 2]"));
    }
    Ok(())
}

fn indicator_mean(batch: &SampleBatch, per_sample: impl Fn(&[f64]) -> f64) -> Result<EstimateCI> {
    let series: Vec<f64> = batch.rows().map(per_sample).collect();
    let (m, se) = batch_means(&series, batch.chain_lengths())?;
    Ok(EstimateCI::normal(m, se, DEFAULT_CONFIDENCE, series.len())?.clamped(0.0, 1.0))
}

/// `P(d_12 < t)`, pooled over all coordinates (exchangeable under the
/// uniform measure), with a batch-means standard error.
pub fn prob_distance_below(n: usize, t: f64, batch: &SampleBatch) -> Result<EstimateCI> {
    check_full_box(n, batch)?;
    let dim = batch.dim() as f64;
    indicator_mean(batch, |row| row.iter().filter(|&&x| x < t).count() as f64 / dim)
}

/// `P(d_e < t)` from the single coordinate `pair` (flat index).
pub fn prob_pair_below(batch: &SampleBatch, pair: usize, t: f64) -> Result<EstimateCI> {
    if pair >= batch.dim() {
        return Err(Error::arg(format!("pair index {pair} out of range")));
    }
    check_full_box(batch.n(), batch)?;
    indicator_mean(batch, |row| f64::from(u8::from(row[pair] < t)))
}

/// `P(min_ij d_ij <= threshold)` for each threshold.
pub fn min_distance_cdf(n: usize, thresholds: &[f64], batch: &SampleBatch) -> Result<Vec<EstimateCI>> {
    check_full_box(n, batch)?;
    let minima: Vec<f64> = batch
        .rows()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    thresholds
        .iter()
        .map(|&th| {
            let series: Vec<f64> = minima.iter().map(|&m| f64::from(u8::from(m <= th))).collect();
            let (p, se) = batch_means(&series, batch.chain_lengths())?;
            Ok(EstimateCI::normal(p, se, DEFAULT_CONFIDENCE, series.len())?.clamped(0.0, 1.0))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemovalBoundReport {
    pub n: usize,
    pub alpha: f64,
    pub probability: EstimateCI,
    /// `P(min ≤ α) · Vol(M_n)`.
    pub lhs: f64,
    pub lhs_std_error: f64,
    /// `C(n,2) (2α)^{n−2} Vol(M_{n−1})`.
    pub rhs: f64,
    /// `lhs <= rhs · (1 + 3·se/p)`, the slack being three relative standard
    /// errors of the probability estimate.
    pub holds: bool,
}

pub fn removal_rhs(n: usize, alpha: f64, vol_prev: f64) -> f64 {
    let pairs = (n * (n - 1) / 2) as f64;
    pairs * (2.0 * alpha).powi(n as i32 - 2) * vol_prev
}

/// Compares the volume of `{d ∈ M_n : min d_ij ≤ α}` (estimated from `batch`)
/// with `C(n,2) (2α)^{n−2} Vol(M_{n−1})`.
pub fn check_removal_bound(
    n: usize,
    alpha: f64,
    batch: &SampleBatch,
    vols: (f64, f64),
) -> Result<RemovalBoundReport> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::arg(format!("alpha = {alpha} outside (0, 1/2]")));
    }
    if n < 3 {
        return Err(Error::arg("removal bound needs n >= 3"));
    }
    let (vol_n, vol_prev) = vols;
    let probability = min_distance_cdf(n, &[alpha], batch)?.remove(0);
    let lhs = probability.value * vol_n;
    let lhs_std_error = probability.std_error * vol_n;
    let rhs = removal_rhs(n, alpha, vol_prev);
    let rel = if probability.value > 0.0 {
        probability.std_error / probability.value
    } else {
        0.0
    };
    Ok(RemovalBoundReport {
        n,
        alpha,
        lhs,
        lhs_std_error,
        rhs,
        holds: lhs <= rhs * (1.0 + 3.0 * rel),
        probability,
    })
}

/// `Vol({d ∈ M_n : min d_ij ≤ α})` exactly, by inclusion–exclusion over the
/// sets of coordinates clipped to `≤ α`.
pub fn exact_removal_lhs(n: usize, alpha: &Q) -> Result<Q> {
    exactvol::check_exact_limit(n, false)?;
    let base = RationalPolytope::metric(n)?;
    let dim = base.dim();
    let mut total = Q::from_integer(0.into());
    for mask in 1u32..(1 << dim) {
        let mut poly = base.clone();
        for c in (0..dim).filter(|c| mask >> c & 1 == 1) {
            poly = exactvol::clip(&poly, RationalHalfspace::upper(dim, c, alpha.clone())?)?;
        }
        let v = exactvol::exact_volume(&poly).value;
        if mask.count_ones() % 2 == 1 {
            total += v;
        } else {
            total -= v;
        }
    }
    Ok(total)
}

/// One row of an n-sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub quantity: String,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_samples: usize,
    /// `√n · estimate`.
    pub scaled: f64,
}

impl SweepRow {
    pub fn new(n: usize, quantity: &str, e: &EstimateCI) -> Self {
        SweepRow {
            n,
            quantity: quantity.to_string(),
            estimate: e.value,
            std_error: e.std_error,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            n_samples: e.n_samples,
            scaled: (n as f64).sqrt() * e.value,
        }
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,quantity,estimate,std_error,ci_low,ci_high,n_samples,sqrt_n_times_estimate\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:?},{:?},{:?},{:?},{},{:?}\n",
            r.n, r.quantity, r.estimate, r.std_error, r.ci_low, r.ci_high, r.n_samples, r.scaled
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactvol::{integer, rational};
    use crate::sampler::{hit_and_run, ChainConfig};

    #[test]
    fn edge_thresholds() {
        let batch = hit_and_run(&ChainConfig::new(3, 2), 2_000).unwrap();
        assert_eq!(prob_distance_below(3, 2.0 + 1e-9, &batch).unwrap().value, 1.0);
        assert_eq!(prob_distance_below(3, 0.0, &batch).unwrap().value, 0.0);
        assert_eq!(min_distance_cdf(3, &[2.0], &batch).unwrap()[0].value, 1.0);
    }

    #[test]
    fn rejects_wrong_batches() {
        let batch = hit_and_run(&ChainConfig::new(3, 2), 10).unwrap();
        assert!(prob_distance_below(4, 1.0, &batch).is_err());
        let clipped = hit_and_run(&ChainConfig::new(3, 2).with_box(1.0, 2.0), 10).unwrap();
        assert!(prob_distance_below(3, 1.0, &clipped).is_err());
        let empty = hit_and_run(&ChainConfig::new(3, 2), 0).unwrap();
        assert!(prob_distance_below(3, 1.0, &empty).is_err());
    }

    #[test]
    fn removal_argument_range() {
        let batch = hit_and_run(&ChainConfig::new(4, 2), 10).unwrap();
        assert!(check_removal_bound(4, 0.0, &batch, (1.0, 1.0)).is_err());
        assert!(check_removal_bound(4, 0.6, &batch, (1.0, 1.0)).is_err());
        assert!(check_removal_bound(4, 0.5, &batch, (136.0 / 15.0, 4.0)).unwrap().holds);
    }

    #[test]
    fn removal_rhs_values() {
        assert!((removal_rhs(4, 0.5, 4.0) - 24.0).abs() < 1e-12);
        assert!((removal_rhs(4, 0.1, 4.0) - 0.96).abs() < 1e-12);
        assert!((removal_rhs(3, 0.25, 2.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_removal_three_points() {
        // Oracle: 4 − ∫∫_{[1/4,2]²} (min(2, x+y) − max(1/4, |x−y|))₊ dx dy,
        // evaluated by adaptive quadrature to 1e-8: 0.328125 = 21/64.
        let lhs = exact_removal_lhs(3, &rational(1, 4)).unwrap();
        assert_eq!(lhs, rational(21, 64));
        assert!(lhs < integer(3));
    }

    #[test]
    fn sweep_table() {
        let e = EstimateCI::normal(0.25, 0.01, 0.99, 100).unwrap();
        let csv = sweep_csv(&[SweepRow::new(4, "p", &e)]);
        assert!(csv.lines().nth(1).unwrap().starts_with("4,p,0.25,0.01,"));
        assert!(csv.trim_end().ends_with(",100,0.5"));
    }
}
