//! Registered self-check suites run by `metricpoly verify`.

use metric_polytope::discrete::{hypergraph_stats, sandwich_check, supersaturation_check, DEFAULT_HYPERGRAPH_BUDGET};
use metric_polytope::estimators::{
    check_removal_bound, exact_removal_lhs, multilevel_volume_refined, prob_distance_below, LevelSchedule,
};
use metric_polytope::exactvol::{
    clip, exact_volume, format_rational, integer, metric_volume, radius_of, rational, to_f64, RationalHalfspace,
    RationalPolytope,
};
use metric_polytope::sampler::{default_delta, derive_seed, local_lemma_experiment, simulate_triple_violation};
use serde::Serialize;
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::{ExperimentConfig, Params};
use crate::error::{CliError, CliResult};
use crate::verbs::{batch, ci_json, seed_or_auto, Sampling, MAX_REFINEMENTS};
use crate::Report;

pub const SUITES: [&str; 8] = [
    "radius-monotone",
    "exact-golden",
    "sampler-uniformity",
    "tail-scaling",
    "sandwich",
    "supersaturation",
    "removal-bound",
    "local-lemma-consistency",
];

/// Significance level of the octant chi-square test.
pub const CHI_SQUARE_ALPHA: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub details: Value,
}

fn check(name: impl Into<String>, passed: bool, details: Value) -> Check {
    Check {
        name: name.into(),
        passed,
        details,
    }
}

/// A validated suite, ready to run.
#[derive(Clone, Debug)]
pub struct Plan {
    suite: String,
    seed: Option<u64>,
    samples: usize,
    trials: u64,
}

/// Validates the suite name and its parameters.
pub fn plan(suite: &str, cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Plan> {
    if !SUITES.contains(&suite) {
        return Err(CliError::validation(format!(
            "unknown suite {suite:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    let (samples, trials) = match suite {
        "sampler-uniformity" => (100_000, 0),
        "tail-scaling" => (20_000, 0),
        "removal-bound" => (100_000, 0),
        "supersaturation" => (0, 10_000),
        "local-lemma-consistency" => (20_000, 1_000_000),
        _ => (0, 0),
    };
    if p.get::<usize>("samples")? == Some(0) || p.get::<u64>("trials")? == Some(0) {
        return Err(CliError::validation("samples and trials must be positive"));
    }
    let samples = p.get_or("samples", samples)?;
    let trials = p.get_or("trials", trials)?;
    let randomized = samples > 0 || trials > 0;
    Ok(Plan {
        suite: suite.to_string(),
        seed: randomized.then(|| seed_or_auto(cfg)),
        samples,
        trials,
    })
}

impl Plan {
    pub fn run(&self) -> CliResult<Report> {
        let seed = self.seed.unwrap_or(0);
        let checks = match self.suite.as_str() {
            "radius-monotone" => radius_monotone()?,
            "exact-golden" => exact_golden()?,
            "sampler-uniformity" => sampler_uniformity(seed, self.samples)?,
            "tail-scaling" => tail_scaling(seed, self.samples)?,
            "sandwich" => sandwich()?,
            "supersaturation" => supersaturation(seed, self.trials)?,
            "removal-bound" => removal_bound(seed, self.samples)?,
            "local-lemma-consistency" => local_lemma_consistency(seed, self.samples, self.trials)?,
            other => unreachable!("suite {other} passed validation"),
        };
        let passed = checks.iter().all(|c| c.passed);
        let ok = checks.iter().filter(|c| c.passed).count();
        let summary = format!(
            "verify {}: {ok}/{} checks passed{}",
            self.suite,
            checks.len(),
            if passed { "" } else { " (FAILED)" }
        );
        let mut report = Report::json(
            json!({ "suite": self.suite, "passed": passed, "seed": self.seed, "checks": checks }),
            summary,
        );
        report.passed = passed;
        Ok(report)
    }
}

fn radius_monotone() -> CliResult<Vec<Check>> {
    let r: Vec<f64> = (2..=4)
        .map(|n| Ok(radius_of(&metric_volume(n, false)?, n)))
        .collect::<CliResult<_>>()?;
    Ok(vec![check(
        "r2 >= r3 >= r4",
        r[0] >= r[1] && r[1] >= r[2],
        json!({ "r2": r[0], "r3": r[1], "r4": r[2], "strict": r[0] > r[1] && r[1] > r[2] }),
    )])
}

fn exact_golden() -> CliResult<Vec<Check>> {
    [(3, integer(4)), (4, rational(136, 15))]
        .into_iter()
        .map(|(n, want)| {
            let got = metric_volume(n, false)?;
            Ok(check(
                format!("Vol(M_{n}) = {}", format_rational(&want)),
                got == want,
                json!({ "n": n, "volume": format_rational(&got), "expected": format_rational(&want) }),
            ))
        })
        .collect()
}

/// `P(d ∈ octant)` for the eight octants of `M_3` split at 1; bit `k` of the
/// index is set when coordinate `k` is at least 1.
pub fn octant_masses() -> CliResult<[f64; 8]> {
    let base = RationalPolytope::metric(3)?;
    let total = exact_volume(&base).value;
    let mut out = [0.0; 8];
    for (cell, slot) in out.iter_mut().enumerate() {
        let mut poly = base.clone();
        for k in 0..3 {
            let h = if cell >> k & 1 == 1 {
                RationalHalfspace::lower(3, k, integer(1))?
            } else {
                RationalHalfspace::upper(3, k, integer(1))?
            };
            poly = clip(&poly, h)?;
        }
        *slot = to_f64(&(exact_volume(&poly).value / &total));
    }
    Ok(out)
}

fn sampler_uniformity(seed: u64, samples: usize) -> CliResult<Vec<Check>> {
    let masses = octant_masses()?;
    let b = batch(3, seed, samples, &Sampling::for_n(3))?;
    let mut counts = [0u64; 8];
    for row in b.rows() {
        let cell: usize = (0..3).map(|k| usize::from(row[k] >= 1.0) << k).sum();
        counts[cell] += 1;
    }
    let total = b.len() as f64;
    let stat: f64 = counts
        .iter()
        .zip(&masses)
        .map(|(&c, &m)| (c as f64 - total * m).powi(2) / (total * m))
        .sum();
    let p_value = 1.0 - ChiSquared::new(7.0).expect("positive degrees of freedom").cdf(stat);
    let tail = prob_distance_below(3, 1.0, &b)?;
    Ok(vec![
        check(
            "octant chi-square",
            p_value >= CHI_SQUARE_ALPHA,
            json!({ "statistic": stat, "dof": 7, "p_value": p_value, "alpha": CHI_SQUARE_ALPHA,
                    "counts": counts, "expected": masses.map(|m| m * total), "samples": b.len() }),
        ),
        check(
            "P(d12 < 1) = 0.375 ± 0.01",
            (tail.value - 0.375).abs() <= 0.01,
            json!({ "estimate": tail.value, "std_error": tail.std_error, "ci": ci_json(&tail) }),
        ),
    ])
}

fn tail_scaling(seed: u64, samples: usize) -> CliResult<Vec<Check>> {
    let mut table = Vec::new();
    let mut values = Vec::new();
    for n in [4usize, 8, 16, 32] {
        let s = derive_seed(seed, n as u64);
        let b = batch(n, s, samples, &Sampling::for_n(n))?;
        let e = prob_distance_below(n, 1.0, &b)?;
        values.push(e.value);
        table.push(json!({ "n": n, "seed": s, "estimate": e.value, "std_error": e.std_error,
                           "sqrt_n_times_estimate": (n as f64).sqrt() * e.value }));
    }
    Ok(vec![check(
        "P(d12 < 1) strictly decreases over n = 4, 8, 16, 32",
        values.windows(2).all(|w| w[1] < w[0]),
        json!({ "table": table }),
    )])
}

fn sandwich() -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=4 {
        let vol = metric_volume(n, false)?;
        for m in [2, 4] {
            let r = sandwich_check(n, m, &vol)?;
            out.push(check(
                format!("sandwich n={n} M={m}"),
                r.holds(),
                serde_json::to_value(&r).map_err(|e| CliError::io(e.to_string()))?,
            ));
        }
    }
    Ok(out)
}

fn supersaturation(seed: u64, trials: u64) -> CliResult<Vec<Check>> {
    let h = hypergraph_stats(3, 3, DEFAULT_HYPERGRAPH_BUDGET)?;
    let r = supersaturation_check(16, 1, trials, seed)?;
    Ok(vec![
        check("edges of H_3^3 = 3", h.edge_count == 3, json!({ "edge_count": h.edge_count })),
        check(
            "supersaturation M=16 m=1",
            r.passed,
            serde_json::to_value(&r).map_err(|e| CliError::io(e.to_string()))?,
        ),
    ])
}

fn removal_bound(seed: u64, samples: usize) -> CliResult<Vec<Check>> {
    let lhs3 = exact_removal_lhs(3, &rational(1, 4))?;
    let vol2 = metric_volume(2, false)?;
    // C(3,2)·(2α)^1·Vol(M_2) with α = 1/4.
    let rhs3 = integer(3) * rational(1, 2) * &vol2;
    let vol4 = to_f64(&metric_volume(4, false)?);
    let vol3 = to_f64(&metric_volume(3, false)?);
    let b = batch(4, seed, samples, &Sampling::for_n(4))?;
    let r = check_removal_bound(4, 0.1, &b, (vol4, vol3))?;
    Ok(vec![
        check(
            "exact removal bound n=3 alpha=1/4",
            lhs3 <= rhs3,
            json!({ "lhs": format_rational(&lhs3), "rhs": format_rational(&rhs3) }),
        ),
        check(
            "Monte Carlo removal bound n=4 alpha=0.1",
            r.holds,
            serde_json::to_value(&r).map_err(|e| CliError::io(e.to_string()))?,
        ),
    ])
}

fn local_lemma_consistency(seed: u64, samples: usize, trials: u64) -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    for n in [4usize, 5, 6] {
        let delta = default_delta(n);
        let r = local_lemma_experiment(n, delta, trials, derive_seed(seed, n as u64))?;
        let schedule = LevelSchedule::uniform(n, samples, derive_seed(seed, 100 + n as u64))
            .with_sampler(Sampling::for_n(n).level_sampler());
        let ml = multilevel_volume_refined(&schedule, MAX_REFINEMENTS)?.log_volume;
        let p = r.p_hat;
        let rel_p = if p > 0.0 { ((1.0 - p) / (p * trials as f64)).sqrt() } else { 0.0 };
        let joint = (ml.std_error.powi(2) + rel_p.powi(2)).sqrt();
        let passed = !r.lower_bound_finite || r.log_volume_lower_bound <= ml.value + 3.0 * joint;
        out.push(check(
            format!("rejection bound <= multilevel estimate, n={n}"),
            passed,
            json!({ "n": n, "delta": delta, "lower_bound": if r.lower_bound_finite { json!(r.log_volume_lower_bound) } else { Value::Null },
                    "accepted": r.accepted, "trials": r.trials, "multilevel": ml.value,
                    "multilevel_std_error": ml.std_error, "joint_std_error": joint }),
        ));
    }
    let (freq, se) = simulate_triple_violation(0.25, trials, derive_seed(seed, 999))?;
    out.push(check(
        "triangle violation at delta=0.25 within 0.002 of 0.032",
        (freq - 0.032).abs() <= 0.002,
        json!({ "frequency": freq, "std_error": se }),
    ));
    Ok(out)
}
