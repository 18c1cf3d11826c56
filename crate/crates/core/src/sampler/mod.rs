//! Uniform sampling from `M_n ∩ [low, high]^dim` by hit-and-run, and the
//! product-measure rejection experiment.

mod body;
mod chain;
mod local_lemma;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use body::{chord, Body};
pub use chain::{hit_and_run, hit_and_run_chains, start_state, ChainDiagnostics, SampleBatch};
pub use local_lemma::{
    default_delta, local_lemma_experiment, simulate_triple_violation, triple_violation_prob,
    RejectionResult,
};

use crate::error::{Error, Result};

/// Seedable generator with independent streams; chain `c` of seed `s` draws
/// from stream `c` of `ChaCha8(s)`.
pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent sub-experiment of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

/// How a hit-and-run transition picks its line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Isotropic direction (standard Gaussian); one chord per step, costing
    /// a pass over all triangles.
    #[default]
    Sphere,
    /// One step is a systematic sweep of coordinate-direction moves, each a
    /// uniform draw from the coordinate's feasible interval. A sweep costs
    /// about as much as one sphere step but moves every coordinate.
    CoordinateSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    pub box_low: f64,
    pub box_high: f64,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    #[serde(default)]
    pub direction: Direction,
}

impl ChainConfig {
    /// Full box `[0, 2]`, burn-in `50·dim`, thinning `5·dim`, sphere directions.
    pub fn new(n: usize, seed: u64) -> Self {
        let dim = n * n.saturating_sub(1) / 2;
        ChainConfig {
            n,
            box_low: 0.0,
            box_high: 2.0,
            burn_in: 50 * dim,
            thinning: 5 * dim,
            seed,
            direction: Direction::Sphere,
        }
    }

    /// Coordinate sweeps with `burn_in` and `thinning` counted in sweeps.
    pub fn sweeps(n: usize, seed: u64, burn_in: usize, thinning: usize) -> Self {
        ChainConfig {
            burn_in,
            thinning,
            direction: Direction::CoordinateSweep,
            ..ChainConfig::new(n, seed)
        }
    }

    pub fn with_box(mut self, low: f64, high: f64) -> Self {
        self.box_low = low;
        self.box_high = high;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::arg(format!("need at least 2 points, got n = {}", self.n)));
        }
        if !(self.box_low >= 0.0 && self.box_low < self.box_high && self.box_high <= 2.0) {
            return Err(Error::arg(format!(
                "box [{}, {}] must satisfy 0 <= low < high <= 2",
                self.box_low, self.box_high
            )));
        }
        if self.thinning == 0 {
            return Err(Error::arg("thinning must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_scale_with_dim() {
        let c = ChainConfig::new(4, 1);
        assert_eq!((c.burn_in, c.thinning), (300, 30));
        assert_eq!((c.box_low, c.box_high), (0.0, 2.0));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation() {
        let bad = [
            ChainConfig { thinning: 0, ..ChainConfig::new(3, 0) },
            ChainConfig::new(3, 0).with_box(1.0, 1.0),
            ChainConfig::new(3, 0).with_box(-0.5, 1.0),
            ChainConfig::new(3, 0).with_box(0.0, 2.5),
            ChainConfig::new(1, 0),
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn streams_differ() {
        use rand::RngCore;
        let a = chain_rng(5, 0).next_u64();
        let b = chain_rng(5, 1).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, chain_rng(5, 0).next_u64());
    }
}
