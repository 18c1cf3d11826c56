use std::time::{Instant, SystemTime, UNIX_EPOCH};

use metric_polytope::discrete::{
    count_discrete_with_workers, enumerate_discrete, hypergraph_stats, sandwich_check, supersaturation_args, supersaturation_check,
    DEFAULT_HYPERGRAPH_BUDGET, DEFAULT_NODE_BUDGET,
};
use metric_polytope::estimators::{
    min_distance_cdf, min_distance_threshold, multilevel_volume_refined, prob_distance_below, sweep_csv, EstimateCI,
    LevelSampler, LevelSchedule, SweepRow, DEFAULT_CONFIDENCE, DEFAULT_MIN_DISTANCE_EXPONENT,
};
use metric_polytope::exactvol::{
    check_exact_limit, clip, exact_volume, format_rational, metric_volume, parse_rational, to_f64, RationalHalfspace,
    RationalPolytope,
};
use metric_polytope::metric::csv_header;
use metric_polytope::sampler::{
    default_delta, derive_seed, hit_and_run_chains, local_lemma_experiment, triple_violation_prob, ChainConfig,
    Direction, SampleBatch,
};
use metric_polytope::PairIndexer;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format, Params, Verb};
use crate::error::{CliError, CliResult};
use crate::{verify, Report};

/// Levels are refined at most this many times when a level accepts nothing.
pub const MAX_REFINEMENTS: usize = 8;

pub fn run(cfg: &ExperimentConfig) -> CliResult<Report> {
    let format = cfg.output_format();
    let csv_ok = matches!(
        cfg.verb,
        Verb::Sample | Verb::EstimateTail | Verb::MinDistance | Verb::CountDiscrete
    );
    if format == Format::Csv && !csv_ok {
        return Err(CliError::validation(format!("{} has no CSV output", cfg.verb.name())));
    }
    let mut p = Params::new(&cfg.params);
    match cfg.verb {
        Verb::ExactVolume => exact_volume_verb(cfg, &mut p),
        Verb::Sample => sample(cfg, &mut p),
        Verb::EstimateVolume => estimate_volume(cfg, &mut p),
        Verb::EstimateTail => estimate_tail(cfg, &mut p),
        Verb::MinDistance => min_distance(cfg, &mut p),
        Verb::LocalLemma => local_lemma(cfg, &mut p),
        Verb::CountDiscrete => count(cfg, &mut p),
        Verb::Sandwich => sandwich(cfg, &mut p),
        Verb::Hypergraph => hypergraph(cfg, &mut p),
        Verb::Verify => {
            let suite = p
                .text("suite")
                .ok_or_else(|| CliError::validation("verify needs --suite"))?;
            let plan = verify::plan(&suite, cfg, &mut p)?;
            finish(&mut p)?;
            plan.run()
        }
    }
}

fn finish(p: &mut Params) -> CliResult<()> {
    std::mem::replace(p, Params::new(&Default::default())).finish()
}

/// The configured seed, or one drawn from the clock.
pub fn seed_or_auto(cfg: &ExperimentConfig) -> u64 {
    cfg.seed.unwrap_or_else(|| {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        derive_seed(t.as_secs(), u64::from(t.subsec_nanos()))
    })
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(key: &str, v: T) -> CliResult<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::validation(format!("{key} must be positive, got {v}")))
    }
}

fn require_n(cfg: &ExperimentConfig, min: usize) -> CliResult<usize> {
    let n = cfg.require_n()?;
    if n < min {
        return Err(CliError::validation(format!("{} needs n >= {min}, got {n}", cfg.verb.name())));
    }
    Ok(n)
}

/// Chain settings: sphere directions up to `n = 4`, coordinate sweeps
/// (burn-in 100, thinning 2) beyond; four chains.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampling {
    pub direction: Direction,
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
    pub chains: usize,
}

impl Sampling {
    pub fn for_n(n: usize) -> Self {
        if n <= 4 {
            Sampling {
                direction: Direction::Sphere,
                burn_in: None,
                thinning: None,
                chains: 4,
            }
        } else {
            Sampling {
                direction: Direction::CoordinateSweep,
                burn_in: Some(100),
                thinning: Some(2),
                chains: 4,
            }
        }
    }

    pub fn from_params(n: usize, p: &mut Params) -> CliResult<Self> {
        let mut s = Sampling::for_n(n);
        if let Some(d) = p.text("direction") {
            s.direction = match d.as_str() {
                "sphere" => Direction::Sphere,
                "coordinate-sweep" => Direction::CoordinateSweep,
                _ => return Err(CliError::validation(format!("unknown direction {d:?}"))),
            };
            if p.get::<usize>("burn_in")?.is_none() {
                s.burn_in = None;
            }
            if p.get::<usize>("thinning")?.is_none() {
                s.thinning = None;
            }
        }
        if let Some(b) = p.get("burn_in")? {
            s.burn_in = Some(b);
        }
        if let Some(t) = p.get("thinning")? {
            s.thinning = Some(positive("thinning", t)?);
        }
        s.chains = positive("chains", p.get_or("chains", s.chains)?)?;
        Ok(s)
    }

    pub fn chain_config(&self, n: usize, seed: u64) -> ChainConfig {
        let mut c = ChainConfig::new(n, seed);
        c.direction = self.direction;
        if let Some(b) = self.burn_in {
            c.burn_in = b;
        }
        if let Some(t) = self.thinning {
            c.thinning = t;
        }
        c
    }

    pub fn level_sampler(&self) -> LevelSampler {
        LevelSampler {
            direction: self.direction,
            burn_in: self.burn_in,
            thinning: self.thinning,
            chains: self.chains,
        }
    }

    fn to_json(&self, n: usize) -> Value {
        let c = self.chain_config(n, 0);
        json!({
            "direction": c.direction,
            "burn_in": c.burn_in,
            "thinning": c.thinning,
            "chains": self.chains,
        })
    }
}

pub fn ci_json(e: &EstimateCI) -> Value {
    json!([e.ci_low, e.ci_high])
}

fn parse_clip(idx: &PairIndexer, text: &str) -> CliResult<RationalHalfspace> {
    let (lhs, rhs, upper) = if let Some((l, r)) = text.split_once("<=") {
        (l, r, true)
    } else if let Some((l, r)) = text.split_once(">=") {
        (l, r, false)
    } else {
        return Err(CliError::validation(format!("clip {text:?} must read d_i_j<=q or d_i_j>=q")));
    };
    let bad = || CliError::validation(format!("clip {text:?}: expected a coordinate like d_1_2"));
    let mut parts = lhs.trim().split('_');
    if parts.next() != Some("d") {
        return Err(bad());
    }
    let i: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let j: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    let coord = idx.rank_sym(i, j)?;
    let bound = parse_rational(rhs.trim())?;
    let h = if upper {
        RationalHalfspace::upper(idx.dim(), coord, bound)
    } else {
        RationalHalfspace::lower(idx.dim(), coord, bound)
    };
    Ok(h?)
}

fn exact_volume_verb(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 2)?;
    let long_running = p.get_or("long_running", false)?;
    check_exact_limit(n, long_running)?;
    let idx = PairIndexer::new(n)?;
    let clip_text: Vec<String> = p
        .text("clips")
        .map(|s| s.split(';').map(str::trim).filter(|c| !c.is_empty()).map(String::from).collect())
        .unwrap_or_default();
    let clips = clip_text
        .iter()
        .map(|c| parse_clip(&idx, c))
        .collect::<CliResult<Vec<_>>>()?;
    finish(p)?;

    let start = Instant::now();
    let mut poly = RationalPolytope::metric(n)?;
    for h in clips {
        poly = clip(&poly, h)?;
    }
    let vol = exact_volume(&poly);
    let elapsed = start.elapsed().as_millis() as u64;
    let text = format_rational(&vol.value);
    let summary = format!("Vol = {text} (n = {n}, {} vertices, {elapsed} ms)", poly.vertices().len());
    Ok(Report::json(
        json!({
            "n": n,
            "clips": clip_text,
            "volume": text,
            "volume_float": to_f64(&vol.value),
            "vertex_count": poly.vertices().len(),
            "elapsed_ms": elapsed,
        }),
        summary,
    ))
}

fn sample(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 2)?;
    let samples: usize = positive("samples", p.get_or("samples", 1000)?)?;
    let sampling = Sampling::from_params(n, p)?;
    let low = p.get_or("box_low", 0.0)?;
    let high = p.get_or("box_high", 2.0)?;
    finish(p)?;
    let seed = seed_or_auto(cfg);
    let config = sampling.chain_config(n, seed).with_box(low, high);
    config.validate()?;

    let batch = hit_and_run_chains(&config, samples, sampling.chains, None)?;
    let meta = json!({
        "n": n,
        "seed": seed,
        "samples": batch.len(),
        "chains": sampling.chains,
        "config": batch.config(),
        "chain_lengths": batch.chain_lengths(),
        "diagnostics": batch.diagnostics(),
    });
    let summary = format!("{} samples of M_{n} from {} chains (seed {seed})", batch.len(), sampling.chains);
    let mut json = meta.clone();
    json["header"] = json!(csv_header(n)?.split(',').collect::<Vec<_>>());
    json["samples"] = json!(batch.rows().collect::<Vec<_>>());
    let mut report = Report::json(json, summary);
    report.csv = Some(batch.to_csv());
    report.sidecar = Some(crate::versioned(meta));
    Ok(report)
}

fn estimate_volume(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 2)?;
    let samples: usize = positive("samples", p.get_or("samples", 10_000)?)?;
    let levels: Option<usize> = p.get("levels")?;
    let sampling = Sampling::from_params(n, p)?;
    let refinements = p.get_or("refinements", MAX_REFINEMENTS)?;
    finish(p)?;
    let seed = seed_or_auto(cfg);
    let schedule = match levels {
        Some(l) => LevelSchedule::with_levels(n, positive("levels", l)?, samples, seed),
        None => LevelSchedule::uniform(n, samples, seed),
    }
    .with_sampler(sampling.level_sampler());
    schedule.validate()?;

    let est = multilevel_volume_refined(&schedule, refinements)?;
    let lv = &est.log_volume;
    let dim = (n * (n - 1) / 2) as f64;
    let summary = format!(
        "log Vol(M_{n}) = {:.5} ± {:.5} (Vol ≈ {:.5}, {} levels, seed {seed})",
        lv.value,
        lv.std_error,
        lv.value.exp(),
        est.levels.len()
    );
    Ok(Report::json(
        json!({
            "quantity": "log_volume",
            "n": n,
            "params": { "samples_per_level": samples, "refinements": refinements, "sampler": sampling.to_json(n) },
            "estimate": lv.value,
            "std_error": lv.std_error,
            "ci": ci_json(lv),
            "confidence": lv.confidence,
            "n_samples": lv.n_samples,
            "seed": seed,
            "schedule": est.thresholds,
            "levels": est.levels,
            "volume": lv.value.exp(),
            "radius": (lv.value / dim).exp(),
        }),
        summary,
    ))
}

fn estimate_tail(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let ns: Vec<usize> = match p.list("ns")? {
        Some(ns) => ns,
        None => vec![cfg.require_n()?],
    };
    if ns.is_empty() || ns.iter().any(|&n| n < 2) {
        return Err(CliError::validation("every n must be at least 2"));
    }
    let threshold = p.get_or("threshold", 1.0)?;
    if !(0.0..=2.0).contains(&threshold) {
        return Err(CliError::validation(format!("threshold {threshold} outside [0, 2]")));
    }
    let samples: usize = positive("samples", p.get_or("samples", 20_000)?)?;
    let plans = ns
        .iter()
        .map(|&n| Sampling::from_params(n, &mut p.clone()).map(|s| (n, s)))
        .collect::<CliResult<Vec<_>>>()?;
    Sampling::from_params(ns[0], p)?;
    finish(p)?;
    let seed = seed_or_auto(cfg);

    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (n, sampling) in plans {
        let chain_seed = if ns.len() == 1 { seed } else { derive_seed(seed, n as u64) };
        let batch = hit_and_run_chains(&sampling.chain_config(n, chain_seed), samples, sampling.chains, None)?;
        let e = prob_distance_below(n, threshold, &batch)?;
        rows.push(SweepRow::new(n, "prob_distance_below", &e));
        results.push(json!({
            "n": n,
            "seed": chain_seed,
            "estimate": e.value,
            "std_error": e.std_error,
            "ci": ci_json(&e),
            "n_samples": e.n_samples,
            "sqrt_n_times_estimate": (n as f64).sqrt() * e.value,
            "sampler": sampling.to_json(n),
        }));
    }
    let summary = rows
        .iter()
        .map(|r| format!("n={}: P(d12<{threshold}) = {:.4} ± {:.4}", r.n, r.estimate, r.std_error))
        .collect::<Vec<_>>()
        .join("; ");
    let first = &results[0];
    let json = json!({
        "quantity": "prob_distance_below",
        "n": if ns.len() == 1 { json!(ns[0]) } else { json!(ns) },
        "params": { "threshold": threshold, "samples": samples },
        "estimate": first["estimate"],
        "std_error": first["std_error"],
        "ci": first["ci"],
        "confidence": DEFAULT_CONFIDENCE,
        "n_samples": first["n_samples"],
        "seed": seed,
        "schedule": null,
        "results": results,
    });
    let mut report = Report::json(json, summary);
    report.csv = Some(sweep_csv(&rows));
    Ok(report)
}

fn min_distance(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 2)?;
    let samples: usize = positive("samples", p.get_or("samples", 20_000)?)?;
    let explicit: Option<Vec<f64>> = p.list("thresholds")?;
    let a: Option<Vec<f64>> = p.list("a")?;
    let exponent: f64 = p.get_or("exponent", DEFAULT_MIN_DISTANCE_EXPONENT)?;
    let (rule, thresholds) = match (explicit, a) {
        (Some(_), Some(_)) => return Err(CliError::validation("give either thresholds or a, not both")),
        (Some(t), None) => ("explicit", t),
        (None, Some(a)) => ("1 - a/sqrt(n)", a.iter().map(|a| 1.0 - a / (n as f64).sqrt()).collect()),
        (None, None) => ("1 - n^(-c)", vec![min_distance_threshold(n, exponent)]),
    };
    if thresholds.is_empty() || thresholds.iter().any(|t| !(0.0..=2.0).contains(t)) {
        return Err(CliError::validation(format!("thresholds {thresholds:?} must lie in [0, 2]")));
    }
    let sampling = Sampling::from_params(n, p)?;
    finish(p)?;
    let seed = seed_or_auto(cfg);

    let batch = hit_and_run_chains(&sampling.chain_config(n, seed), samples, sampling.chains, None)?;
    let cdf = min_distance_cdf(n, &thresholds, &batch)?;
    let results: Vec<Value> = thresholds
        .iter()
        .zip(&cdf)
        .map(|(t, e)| {
            json!({ "threshold": t, "estimate": e.value, "std_error": e.std_error, "ci": ci_json(e), "n_samples": e.n_samples })
        })
        .collect();
    let mut csv = String::from("n,threshold,estimate,std_error,ci_low,ci_high,n_samples\n");
    for (t, e) in thresholds.iter().zip(&cdf) {
        csv.push_str(&format!(
            "{n},{t},{},{},{},{},{}\n",
            e.value, e.std_error, e.ci_low, e.ci_high, e.n_samples
        ));
    }
    let summary = thresholds
        .iter()
        .zip(&cdf)
        .map(|(t, e)| format!("P(min <= {t:.4}) = {:.4} ± {:.4}", e.value, e.std_error))
        .collect::<Vec<_>>()
        .join("; ");
    let json = json!({
        "quantity": "min_distance_cdf",
        "n": n,
        "params": { "rule": rule, "exponent": exponent, "samples": samples, "sampler": sampling.to_json(n) },
        "estimate": cdf[0].value,
        "std_error": cdf[0].std_error,
        "ci": ci_json(&cdf[0]),
        "confidence": DEFAULT_CONFIDENCE,
        "n_samples": batch.len(),
        "seed": seed,
        "schedule": thresholds,
        "results": results,
    });
    let mut report = Report::json(json, format!("n={n}: {summary}"));
    report.csv = Some(csv);
    Ok(report)
}

fn local_lemma(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 3)?;
    let delta = p.get_or("delta", default_delta(n))?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::validation(format!("delta = {delta} outside (0, 1)")));
    }
    let trials: u64 = positive("samples", p.get_or("samples", 1_000_000)?)?;
    finish(p)?;
    let seed = seed_or_auto(cfg);
    let r = local_lemma_experiment(n, delta, trials, seed)?;
    let mut json = serde_json::to_value(&r).map_err(|e| CliError::io(e.to_string()))?;
    json["triple_violation_prob"] = json!(triple_violation_prob(delta)?);
    let summary = format!(
        "accepted {}/{} at delta = {delta:.4}; log Vol(M_{n}) >= {}",
        r.accepted,
        r.trials,
        if r.lower_bound_finite { format!("{:.5}", r.log_volume_lower_bound) } else { "-inf".into() }
    );
    Ok(Report::json(json, summary))
}

fn count(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 2)?;
    let m = cfg.require_m()?;
    if m < 1 {
        return Err(CliError::validation("M must be at least 1"));
    }
    let budget = p.get_or("budget", DEFAULT_NODE_BUDGET)?;
    let cap: usize = p.get_or("cap", 1_000_000)?;
    finish(p)?;

    if cfg.output_format() == Format::Csv {
        let all = enumerate_discrete(n, m, cap)?;
        let mut csv = csv_header(n)?;
        csv.push('\n');
        for d in &all {
            csv.push_str(&d.to_csv_row());
            csv.push('\n');
        }
        let mut report = Report::json(
            json!({ "n": n, "M": m, "count": all.len().to_string() }),
            format!("{} metric spaces in [{m}]^C({n},2)", all.len()),
        );
        report.csv = Some(csv);
        return Ok(report);
    }
    let c = count_discrete_with_workers(n, m, budget, None)?;
    let summary = format!("|M_{n}^{m}| = {} ({} nodes)", c.count, c.nodes_explored);
    let json = serde_json::to_value(&c).map_err(|e| CliError::io(e.to_string()))?;
    Ok(Report::json(json, summary))
}

fn sandwich(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 2)?;
    let m = cfg.require_m()?;
    if m < 1 {
        return Err(CliError::validation("M must be at least 1"));
    }
    let long_running = p.get_or("long_running", false)?;
    check_exact_limit(n, long_running)?;
    finish(p)?;
    let vol = metric_volume(n, long_running)?;
    let r = sandwich_check(n, m, &vol)?;
    let mut json = serde_json::to_value(&r).map_err(|e| CliError::io(e.to_string()))?;
    json["holds"] = json!(r.holds());
    let summary = format!(
        "{} <= {} <= {} : {}",
        format_rational(&r.lower),
        r.count,
        format_rational(&r.upper),
        if r.holds() { "holds" } else { "FAILS" }
    );
    Ok(Report::json(json, summary))
}

fn hypergraph(cfg: &ExperimentConfig, p: &mut Params) -> CliResult<Report> {
    let n = require_n(cfg, 3)?;
    let m = cfg.require_m()?;
    let budget = p.get_or("budget", DEFAULT_HYPERGRAPH_BUDGET)?;
    let supersat_m: Option<u32> = p.get("m")?;
    let trials: u64 = positive("trials", p.get_or("trials", 10_000)?)?;
    if let Some(sm) = supersat_m {
        supersaturation_args(m, sm)?;
    }
    finish(p)?;
    let seed = supersat_m.map(|_| seed_or_auto(cfg));

    let stats = hypergraph_stats(n, m, budget)?;
    let mut json = serde_json::to_value(&stats).map_err(|e| CliError::io(e.to_string()))?;
    let mut summary = format!(
        "H_{n}^{m}: {} vertices, {} edges, Δ1={} Δ2={} Δ3={}",
        stats.vertex_count, stats.edge_count, stats.delta1, stats.delta2, stats.delta3
    );
    if let (Some(sm), Some(seed)) = (supersat_m, seed) {
        let r = supersaturation_check(m, sm, trials, seed)?;
        summary.push_str(&format!(
            "; supersaturation m={sm}: min {} vs {} required ({})",
            r.min_count,
            r.required,
            if r.passed { "passed" } else { "FAILED" }
        ));
        json["supersaturation"] = serde_json::to_value(&r).map_err(|e| CliError::io(e.to_string()))?;
    }
    Ok(Report::json(json, summary))
}

/// A chain batch for the verify suites.
pub fn batch(n: usize, seed: u64, samples: usize, sampling: &Sampling) -> CliResult<SampleBatch> {
    Ok(hit_and_run_chains(&sampling.chain_config(n, seed), samples, sampling.chains, None)?)
}
