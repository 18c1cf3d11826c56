//! Randomized check of the local supersaturation lemma: for `M ≥ 16` even
//! and `A, B, C ⊆ [M]` with `|A||B||C| ≥ (M/2 + 2m)^3`, the product of the
//! trimmed sets `A′ × B′ × C′` holds at least `m^3` non-metric triples.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use super::hypergraph::is_non_metric;
use crate::error::{Error, Result};
use crate::sampler::{chain_rng, ChainRng};

/// The `m` smallest and `m` largest elements of `set` (all of it when
/// `|set| ≤ 2m`), sorted.
pub fn prime_subset(set: &[u32], m: usize) -> Vec<u32> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() <= 2 * m {
        return s;
    }
    let mut out = s[..m].to_vec();
    out.extend_from_slice(&s[s.len() - m..]);
    out
}

fn count_non_metric(a: &[u32], b: &[u32], c: &[u32]) -> u64 {
    let mut count = 0;
    for &x in a {
        for &y in b {
            count += c.iter().filter(|&&z| is_non_metric(x, y, z)).count() as u64;
        }
    }
    count
}

fn threshold(big_m: u32, m: u32) -> u64 {
    u64::from(big_m / 2 + 2 * m).pow(3)
}

/// Rejects `(M, m)` outside the supersaturation regime.
pub fn supersaturation_args(big_m: u32, m: u32) -> Result<()> {
    if big_m < 16 || big_m % 2 == 1 {
        return Err(Error::arg(format!("M must be even and at least 16, got {big_m}")));
    }
    if m < 1 {
        return Err(Error::arg("m must be at least 1"));
    }
    if big_m / 2 + 2 * m > big_m {
        return Err(Error::arg(format!(
            "(M/2 + 2m)^3 exceeds M^3 for M = {big_m}, m = {m}: hypothesis unsatisfiable"
        )));
    }
    Ok(())
}

/// Non-metric triples in `A′ × B′ × C′` for one explicit instance, and
/// whether the instance meets the size hypothesis.
pub fn supersaturation_instance(
    big_m: u32,
    m: u32,
    sets: [&[u32]; 3],
) -> Result<(bool, u64)> {
    supersaturation_args(big_m, m)?;
    let mut primes = Vec::with_capacity(3);
    let mut product = 1u64;
    for s in sets {
        if s.iter().any(|&v| v < 1 || v > big_m) {
            return Err(Error::arg(format!("set element outside 1..={big_m}")));
        }
        let p = prime_subset(s, m as usize);
        let mut distinct = s.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        product *= distinct.len() as u64;
        primes.push(p);
    }
    let hypothesis = product >= threshold(big_m, m);
    Ok((hypothesis, count_non_metric(&primes[0], &primes[1], &primes[2])))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupersaturationReport {
    #[serde(rename = "M")]
    pub big_m: u32,
    pub m: u32,
    pub trials: u64,
    pub seed: u64,
    /// `(M/2 + 2m)^3`.
    pub size_threshold: u64,
    /// `m^3`.
    pub required: u64,
    pub min_count: u64,
    pub failures: u64,
    pub passed: bool,
    /// A triple `(A, B, C)` attaining `min_count`.
    pub hardest: [Vec<u32>; 3],
}

fn draw_sizes(rng: &mut ChainRng, big_m: u32, need: u64) -> [u32; 3] {
    loop {
        let a = rng.random_range(1..=big_m);
        let b = rng.random_range(1..=big_m);
        let ab = u64::from(a) * u64::from(b);
        let c_min = need.div_ceil(ab);
        if c_min > u64::from(big_m) {
            continue;
        }
        let c_min = c_min.max(1) as u32;
        let c = if rng.random_bool(0.5) {
            c_min
        } else {
            rng.random_range(c_min..=big_m)
        };
        return [a, b, c];
    }
}

/// Uniform `size`-subset of `[M]`, or with probability ½ one drawn from a
/// random window only slightly wider than `size`.
fn draw_subset(rng: &mut ChainRng, big_m: u32, size: u32) -> Vec<u32> {
    let (start, width) = if rng.random_bool(0.5) {
        (1, big_m)
    } else {
        let width = rng.random_range(size..=(size + big_m / 4).min(big_m));
        (rng.random_range(1..=big_m - width + 1), width)
    };
    let mut out: Vec<u32> = index::sample(rng, width as usize, size as usize)
        .into_iter()
        .map(|i| start + i as u32)
        .collect();
    out.sort_unstable();
    out
}

/// Draws `trials` triples `(A, B, C)` meeting the size hypothesis and
/// reports the fewest non-metric triples found in `A′ × B′ × C′`.
pub fn supersaturation_check(big_m: u32, m: u32, trials: u64, seed: u64) -> Result<SupersaturationReport> {
    supersaturation_args(big_m, m)?;
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    let need = threshold(big_m, m);
    let required = u64::from(m).pow(3);
    let mut rng = chain_rng(seed, 0);
    let mut min_count = u64::MAX;
    let mut failures = 0;
    let mut hardest: [Vec<u32>; 3] = Default::default();
    for _ in 0..trials {
        let sizes = draw_sizes(&mut rng, big_m, need);
        let sets = sizes.map(|s| draw_subset(&mut rng, big_m, s));
        let (hyp, count) = supersaturation_instance(big_m, m, [&sets[0], &sets[1], &sets[2]])?;
        debug_assert!(hyp);
        if count < required {
            failures += 1;
        }
        if count < min_count {
            min_count = count;
            hardest = sets;
        }
    }
    Ok(SupersaturationReport {
        big_m,
        m,
        trials,
        seed,
        size_threshold: need,
        required,
        min_count,
        failures,
        passed: failures == 0,
        hardest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_subsets() {
        assert_eq!(prime_subset(&[5, 1, 9, 3, 7], 1), vec![1, 9]);
        assert_eq!(prime_subset(&[5, 1, 9, 3, 7], 2), vec![1, 3, 7, 9]);
        assert_eq!(prime_subset(&[4, 2], 3), vec![2, 4]);
    }

    #[test]
    fn full_sets() {
        let full: Vec<u32> = (1..=16).collect();
        let (hyp, count) = supersaturation_instance(16, 1, [&full, &full, &full]).unwrap();
        assert!(hyp);
        // A′ = {1, 16}: the three rotations of (16, 1, 1).
        assert_eq!(count, 3);
    }

    #[test]
    fn arguments() {
        assert!(supersaturation_check(15, 1, 1, 0).is_err());
        assert!(supersaturation_check(14, 1, 1, 0).is_err());
        assert!(supersaturation_check(16, 5, 1, 0).is_err());
        assert!(supersaturation_check(16, 4, 1, 0).is_ok());
        assert!(supersaturation_check(16, 0, 1, 0).is_err());
        assert!(supersaturation_check(16, 1, 0, 0).is_err());
    }

    #[test]
    fn randomized_trials_pass() {
        let r = supersaturation_check(16, 1, 2_000, 7).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.min_count >= 1);
        let r = supersaturation_check(20, 2, 500, 8).unwrap();
        assert!(r.passed && r.min_count >= 8, "{r:?}");
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            supersaturation_check(18, 2, 50, 3).unwrap(),
            supersaturation_check(18, 2, 50, 3).unwrap()
        );
    }
}
