use metric_polytope::estimators::{
    entropy_1d, exact_removal_lhs, min_distance_cdf, multilevel_volume, prob_distance_below,
    prob_pair_below, LevelSampler, LevelSchedule,
};
use metric_polytope::exactvol::{exact_volume, from_f64, rational, to_f64, RationalPolytope};
use metric_polytope::sampler::{hit_and_run_chains, local_lemma_experiment, ChainConfig};
use proptest::prelude::*;

fn box_volume(n: usize, low: f64) -> f64 {
    let low = from_f64(low).unwrap();
    let poly = RationalPolytope::metric_in_box(n, &low, &rational(2, 1)).unwrap();
    to_f64(&exact_volume(&poly).value)
}

#[test]
fn telescoping_levels_match_exact_ratios() {
    let schedule = LevelSchedule::with_levels(3, 3, 40_000, 17);
    let est = multilevel_volume(&schedule).unwrap();
    for level in &est.levels {
        let exact = box_volume(3, level.target_low) / box_volume(3, level.sampled_low);
        assert!(
            (level.fraction - exact).abs() <= 3.0 * level.std_error,
            "level {}: {} vs exact {exact} (se {})",
            level.level,
            level.fraction,
            level.std_error
        );
    }
    let lv = &est.log_volume;
    assert!((lv.value - 4f64.ln()).abs() <= 3.0 * lv.std_error, "{lv:?}");
}

#[test]
fn coordinate_sweep_levels_agree() {
    let schedule = LevelSchedule::uniform(4, 20_000, 5).with_sampler(LevelSampler::sweeps(20, 2));
    let lv = multilevel_volume(&schedule).unwrap().log_volume;
    let exact = (136.0f64 / 15.0).ln();
    assert!((lv.value - exact).abs() <= 4.0 * lv.std_error, "{lv:?} vs {exact}");
}

#[test]
fn pooled_and_single_pair_agree() {
    let batch = hit_and_run_chains(&ChainConfig::new(4, 8), 40_000, 4, None).unwrap();
    let pooled = prob_distance_below(4, 1.0, &batch).unwrap();
    for pair in 0..6 {
        let single = prob_pair_below(&batch, pair, 1.0).unwrap();
        let se = (pooled.std_error.powi(2) + single.std_error.powi(2)).sqrt();
        assert!((pooled.value - single.value).abs() <= 3.5 * se, "pair {pair}: {single:?} vs {pooled:?}");
    }
}

#[test]
fn removal_probability_at_three_points() {
    let exact = to_f64(&exact_removal_lhs(3, &rational(1, 4)).unwrap()) / 4.0;
    let batch = hit_and_run_chains(&ChainConfig::new(3, 41), 60_000, 4, None).unwrap();
    let p = min_distance_cdf(3, &[0.25], &batch).unwrap().remove(0);
    assert!((p.value - exact).abs() <= 3.0 * p.std_error, "{p:?} vs {exact}");
}

#[test]
fn edge_length_entropy_below_uniform() {
    let batch = hit_and_run_chains(&ChainConfig::new(3, 12), 20_000, 4, None).unwrap();
    let d12: Vec<f64> = batch.rows().map(|r| r[0]).collect();
    let h = entropy_1d(&d12).unwrap();
    assert!(h.value <= 2f64.ln() + 0.02, "{h:?}");
}

#[test]
fn rejection_bound_below_volume_at_four_points() {
    let r = local_lemma_experiment(4, 0.25, 200_000, 3).unwrap();
    assert!(r.lower_bound_finite);
    let bound = r.log_volume_lower_bound;
    assert!(bound <= (136.0f64 / 15.0).ln(), "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tail_estimates_are_monotone(seed in 0u64..1_000, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let batch = hit_and_run_chains(&ChainConfig::new(5, seed), 400, 2, None).unwrap();
        let ps = prob_distance_below(5, s, &batch).unwrap();
        let pt = prob_distance_below(5, t, &batch).unwrap();
        prop_assert!(ps.value <= pt.value);
        let cdf = min_distance_cdf(5, &[s, t], &batch).unwrap();
        prop_assert!(cdf[0].value <= cdf[1].value);
        prop_assert!(cdf[0].value >= ps.value);
        prop_assert!(cdf[1].value >= pt.value);
    }
}
