//! Telescoping volume estimator anchored at the unit cube `[1,2]^dim ⊂ M_n`.
//!
//! With box lower bounds `1 = a_0 > a_1 > … > a_T = 0` and
//! `K_t = M_n ∩ [a_t, 2]^dim`, `Vol(K_0) = 1` and `K_T = M_n`, so
//! `log Vol(M_n) = Σ_t −log( Vol(K_t) / Vol(K_{t+1}) )`. Each ratio is the
//! fraction of uniform samples from `K_{t+1}` whose coordinates are all at
//! least `a_t`.

use serde::{Deserialize, Serialize};

use super::stats::{batch_means, EstimateCI, DEFAULT_CONFIDENCE};
use crate::error::{Error, Result};
use crate::sampler::{derive_seed, hit_and_run_chains, ChainConfig, Direction};

/// Chain settings shared by every level. `None` keeps the [`ChainConfig`]
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSampler {
    pub direction: Direction,
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
    pub chains: usize,
}

impl Default for LevelSampler {
    fn default() -> Self {
        LevelSampler {
            direction: Direction::Sphere,
            burn_in: None,
            thinning: None,
            chains: 1,
        }
    }
}

impl LevelSampler {
    /// Coordinate sweeps with the given burn-in and thinning (in sweeps).
    pub fn sweeps(burn_in: usize, thinning: usize) -> Self {
        LevelSampler {
            direction: Direction::CoordinateSweep,
            burn_in: Some(burn_in),
            thinning: Some(thinning),
            chains: 1,
        }
    }

    pub(crate) fn chain_config(&self, n: usize, seed: u64, low: f64) -> ChainConfig {
        let mut cfg = ChainConfig::new(n, seed).with_box(low, 2.0);
        cfg.direction = self.direction;
        if let Some(b) = self.burn_in {
            cfg.burn_in = b;
        }
        if let Some(t) = self.thinning {
            cfg.thinning = t;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub n: usize,
    /// Box lower bounds, strictly decreasing from exactly 1 to exactly 0.
    pub thresholds: Vec<f64>,
    pub samples_per_level: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampler: LevelSampler,
}

impl LevelSchedule {
    /// `a_t = 1 − t/T` with `T = dim`.
    pub fn uniform(n: usize, samples_per_level: usize, seed: u64) -> Self {
        let levels = (n * n.saturating_sub(1) / 2).max(1);
        Self::with_levels(n, levels, samples_per_level, seed)
    }

    pub fn with_levels(n: usize, levels: usize, samples_per_level: usize, seed: u64) -> Self {
        let levels = levels.max(1);
        let thresholds = (0..=levels)
            .map(|t| if t == levels { 0.0 } else { 1.0 - t as f64 / levels as f64 })
            .collect();
        LevelSchedule {
            n,
            thresholds,
            samples_per_level,
            seed,
            sampler: LevelSampler::default(),
        }
    }

    pub fn with_sampler(mut self, sampler: LevelSampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let th = &self.thresholds;
        if th.len() < 2 || th[0] != 1.0 || *th.last().unwrap() != 0.0 {
            return Err(Error::arg("schedule must run from exactly 1 down to exactly 0"));
        }
        if th.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::arg("schedule thresholds must strictly decrease"));
        }
        if self.samples_per_level == 0 {
            return Err(Error::arg("need at least one sample per level"));
        }
        if self.sampler.chains == 0 {
            return Err(Error::arg("need at least one chain per level"));
        }
        if self.n < 2 {
            return Err(Error::arg("need at least 2 points"));
        }
        Ok(())
    }

    pub fn levels(&self) -> usize {
        self.thresholds.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRatio {
    pub level: usize,
    /// Box lower bound of the sampled body.
    pub sampled_low: f64,
    /// Box lower bound the samples are tested against.
    pub target_low: f64,
    pub fraction: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub n: usize,
    pub log_volume: EstimateCI,
    pub levels: Vec<LevelRatio>,
    pub thresholds: Vec<f64>,
}

/// Estimates `log Vol(M_n)`; standard errors of the level fractions are
/// propagated by the delta method, levels being independent.
pub fn multilevel_volume(schedule: &LevelSchedule) -> Result<VolumeEstimate> {
    schedule.validate()?;
    let n = schedule.n;
    let mut levels = Vec::with_capacity(schedule.levels());
    let mut log_vol = 0.0;
    let mut var = 0.0;
    for t in 0..schedule.levels() {
        let target = schedule.thresholds[t];
        let low = schedule.thresholds[t + 1];
        let seed = derive_seed(schedule.seed, t as u64);
        let cfg = schedule.sampler.chain_config(n, seed, low);
        let batch = hit_and_run_chains(&cfg, schedule.samples_per_level, schedule.sampler.chains, None)?;
        let hits: Vec<f64> = batch
            .rows()
            .map(|row| f64::from(u8::from(row.iter().all(|&x| x >= target))))
            .collect();
        let (fraction, se) = batch_means(&hits, batch.chain_lengths())?;
        if fraction == 0.0 {
            return Err(Error::RefineSchedule { level: t, lower: low });
        }
        log_vol -= fraction.ln();
        var += (se / fraction).powi(2);
        levels.push(LevelRatio {
            level: t,
            sampled_low: low,
            target_low: target,
            fraction,
            std_error: se,
            samples: hits.len(),
        });
    }
    let total = schedule.samples_per_level * schedule.levels();
    Ok(VolumeEstimate {
        n,
        log_volume: EstimateCI::normal(log_vol, var.sqrt(), DEFAULT_CONFIDENCE, total)?,
        levels,
        thresholds: schedule.thresholds.clone(),
    })
}

/// [`multilevel_volume`], halving the offending step on a refine-schedule
/// failure, at most `max_refinements` times.
pub fn multilevel_volume_refined(schedule: &LevelSchedule, max_refinements: usize) -> Result<VolumeEstimate> {
    let mut schedule = schedule.clone();
    let mut left = max_refinements;
    loop {
        match multilevel_volume(&schedule) {
            Err(Error::RefineSchedule { level, .. }) if left > 0 => {
                let mid = 0.5 * (schedule.thresholds[level] + schedule.thresholds[level + 1]);
                schedule.thresholds.insert(level + 1, mid);
                left -= 1;
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_shape() {
        let s = LevelSchedule::uniform(3, 10, 0);
        let expect = [1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0];
        assert_eq!(s.thresholds.len(), 4);
        assert!(s.thresholds.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(s.validate().is_ok());
        assert_eq!(LevelSchedule::uniform(2, 10, 0).thresholds, vec![1.0, 0.0]);
    }

    #[test]
    fn invalid_schedules() {
        let mut s = LevelSchedule::uniform(3, 10, 0);
        s.thresholds = vec![1.0, 0.5, 0.5, 0.0];
        assert!(s.validate().is_err());
        s.thresholds = vec![0.9, 0.0];
        assert!(s.validate().is_err());
        s.thresholds = vec![1.0, 0.1];
        assert!(s.validate().is_err());
    }

    #[test]
    fn segment_volume() {
        let est = multilevel_volume(&LevelSchedule::uniform(2, 20_000, 4)).unwrap();
        let lv = &est.log_volume;
        assert!((lv.value - 2f64.ln()).abs() < 4.0 * lv.std_error + 1e-3, "{lv:?}");
    }

    #[test]
    fn refine_inserts_midpoints() {
        // One sample per level makes empty levels likely; refinement must
        // either recover or report the level.
        let s = LevelSchedule::with_levels(4, 1, 1, 1);
        match multilevel_volume_refined(&s, 8) {
            Ok(est) => assert!(est.thresholds.len() >= 2),
            Err(Error::RefineSchedule { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
