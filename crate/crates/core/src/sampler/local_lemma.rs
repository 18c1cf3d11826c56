//! Product-measure rejection experiment behind the volume lower bound
//! `Vol(M_n) >= (1+δ)^C(n,2) · P(G)`, where the coordinates are iid uniform on
//! `[1-δ, 2]` and `G` is the event that all triangle inequalities hold.

use rand::Rng;
use serde::{Serialize, Serializer};

use super::chain_rng;
use crate::error::{Error, Result};
use crate::metric::{triangle_ok, PairIndexer};

/// The customary slack `δ = 1/(2√n)`.
pub fn default_delta(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64).sqrt())
}

/// `P(B_ijk) = 4δ³/(1+δ)³`: the chance that a triangle of iid uniform
/// `[1-δ, 2]` distances violates some triangle inequality.
pub fn triple_violation_prob(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::arg(format!("delta = {delta} outside [0, 1]")));
    }
    Ok(4.0 * delta.powi(3) / (1.0 + delta).powi(3))
}

/// Direct simulation of the triangle-violation probability, returning the
/// frequency and its binomial standard error.
pub fn simulate_triple_violation(delta: f64, trials: u64, seed: u64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::arg(format!("delta = {delta} outside [0, 1]")));
    }
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    let mut rng = chain_rng(seed, 0);
    let lo = 1.0 - delta;
    let width = 1.0 + delta;
    let mut bad = 0u64;
    for _ in 0..trials {
        let x = lo + width * rng.random::<f64>();
        let y = lo + width * rng.random::<f64>();
        let z = lo + width * rng.random::<f64>();
        if !triangle_ok(x, y, z, 0.0) {
            bad += 1;
        }
    }
    let p = bad as f64 / trials as f64;
    Ok((p, (p * (1.0 - p) / trials as f64).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RejectionResult {
    pub n: usize,
    pub delta: f64,
    pub trials: u64,
    pub accepted: u64,
    #[serde(serialize_with = "six_significant")]
    pub p_hat: f64,
    /// `C(n,2)·log(1+δ) + log(p_hat)`; `-inf` when nothing was accepted.
    #[serde(serialize_with = "finite_or_null")]
    pub log_volume_lower_bound: f64,
    pub lower_bound_finite: bool,
    pub seed: u64,
}

fn six_significant<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(*x);
    s.serialize_f64(rounded)
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

/// Draws `trials` iid product vectors on `[1-δ, 2]^C(n,2)` and counts how many
/// lie in `M_n`.
pub fn local_lemma_experiment(n: usize, delta: f64, trials: u64, seed: u64) -> Result<RejectionResult> {
    let idx = PairIndexer::new(n)?;
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("delta = {delta} outside (0, 1)")));
    }
    let triangles = idx.triangles();
    let mut rng = chain_rng(seed, 0);
    let lo = 1.0 - delta;
    let width = 1.0 + delta;
    let mut x = vec![0.0; idx.dim()];
    let mut accepted = 0u64;
    for _ in 0..trials {
        for v in x.iter_mut() {
            *v = lo + width * rng.random::<f64>();
        }
        if triangles
            .iter()
            .all(|&[a, b, c]| triangle_ok(x[a], x[b], x[c], 0.0))
        {
            accepted += 1;
        }
    }
    let p_hat = accepted as f64 / trials as f64;
    let log_volume_lower_bound = if accepted > 0 {
        idx.dim() as f64 * delta.ln_1p() + p_hat.ln()
    } else {
        f64::NEG_INFINITY
    };
    Ok(RejectionResult {
        n,
        delta,
        trials,
        accepted,
        p_hat,
        log_volume_lower_bound,
        lower_bound_finite: accepted > 0,
        seed,
    })
}
