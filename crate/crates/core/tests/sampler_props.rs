use metric_polytope::exactvol::{clip, exact_volume, integer, to_f64, RationalHalfspace, RationalPolytope};
use metric_polytope::metric::{is_metric, MetricVector};
use metric_polytope::sampler::{chain_rng, chord, hit_and_run, hit_and_run_chains, Body, ChainConfig, SampleBatch};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exact probability of each octant `{d_k < 1 or ≥ 1}` of the uniform law on
/// `M_3`, indexed by the bitmask of coordinates at least 1.
fn octant_masses() -> [f64; 8] {
    let base = RationalPolytope::metric(3).unwrap();
    let whole = to_f64(&exact_volume(&base).value);
    std::array::from_fn(|mask| {
        let mut poly = base.clone();
        for k in 0..3 {
            let h = if mask >> k & 1 == 1 {
                RationalHalfspace::lower(3, k, integer(1))
            } else {
                RationalHalfspace::upper(3, k, integer(1))
            };
            poly = clip(&poly, h.unwrap()).unwrap();
        }
        to_f64(&exact_volume(&poly).value) / whole
    })
}

fn chi_square(batch: &SampleBatch, masses: &[f64; 8]) -> f64 {
    let mut counts = [0u64; 8];
    for row in batch.rows() {
        let mask = (0..3).fold(0, |m, k| m | (usize::from(row[k] >= 1.0) << k));
        counts[mask] += 1;
    }
    let n = batch.len() as f64;
    counts
        .iter()
        .zip(masses)
        .map(|(&c, &p)| (c as f64 - n * p).powi(2) / (n * p))
        .sum()
}

fn critical_value(dof: f64, alpha: f64) -> f64 {
    ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - alpha)
}

#[test]
fn octant_masses_sum_to_one() {
    let m = octant_masses();
    assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // {d12 < 1} has volume 3/2.
    let low12: f64 = (0..8).filter(|mask| mask & 1 == 0).map(|mask| m[mask]).sum();
    assert!((low12 - 0.375).abs() < 1e-12);
}

#[test]
fn uniform_on_m3_sphere_directions() {
    let masses = octant_masses();
    let batch = hit_and_run_chains(&ChainConfig::new(3, 2024), 100_000, 4, None).unwrap();
    let stat = chi_square(&batch, &masses);
    assert!(stat < critical_value(7.0, 1e-3), "chi-square {stat}");
    let p = batch.rows().filter(|r| r[0] < 1.0).count() as f64 / batch.len() as f64;
    assert!((p - 0.375).abs() < 0.01, "P(d12 < 1) = {p}");
}

#[test]
fn uniform_on_m3_coordinate_sweeps() {
    let masses = octant_masses();
    let batch = hit_and_run_chains(&ChainConfig::sweeps(3, 99, 50, 3), 100_000, 4, None).unwrap();
    let stat = chi_square(&batch, &masses);
    assert!(stat < critical_value(7.0, 1e-3), "chi-square {stat}");
}

#[test]
fn cube_box_marginals() {
    let batch = hit_and_run(&ChainConfig::new(4, 5).with_box(1.0, 2.0), 20_000).unwrap();
    for k in 0..batch.dim() {
        let mean = batch.rows().map(|r| r[k]).sum::<f64>() / batch.len() as f64;
        assert!((mean - 1.5).abs() < 0.01, "coordinate {k}: mean {mean}");
    }
}

#[test]
fn every_sample_is_inside() {
    for n in [3, 5, 8] {
        for cfg in [ChainConfig::new(n, 1), ChainConfig::sweeps(n, 1, 10, 2), ChainConfig::new(n, 1).with_box(0.5, 1.7)] {
            let batch = hit_and_run(&cfg, 2_000).unwrap();
            for row in batch.rows() {
                assert!(row.iter().all(|&x| x >= cfg.box_low - 1e-9 && x <= cfg.box_high + 1e-9));
                let d = MetricVector::new(n, row.to_vec()).unwrap();
                assert!(is_metric(&d, 1e-9).inside);
            }
        }
    }
}

#[test]
fn determinism() {
    let cfg = ChainConfig::new(5, 77);
    let a = hit_and_run_chains(&cfg, 500, 3, Some(1)).unwrap().to_csv();
    let b = hit_and_run_chains(&cfg, 500, 3, Some(2)).unwrap().to_csv();
    assert_eq!(a, b);
    assert_ne!(a, hit_and_run_chains(&ChainConfig::new(5, 78), 500, 3, None).unwrap().to_csv());
}

fn bisect(body: &Body, x: &[f64], u: &[f64], inside: f64, outside: f64) -> f64 {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let p: Vec<f64> = x.iter().zip(u).map(|(xi, ui)| xi + mid * ui).collect();
        if body.contains(&p, 1e-12) {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

#[test]
fn chord_matches_bisection() {
    let mut rng = chain_rng(3, 9);
    let mut checked = 0;
    for (n, low, high) in [(3, 0.0, 2.0), (4, 0.0, 2.0), (6, 0.0, 2.0), (5, 0.5, 1.8)] {
        let body = Body::new(n, low, high).unwrap();
        let batch = hit_and_run(&ChainConfig::new(n, 4).with_box(low, high), 2_500).unwrap();
        for row in batch.rows() {
            let u: Vec<f64> = (0..row.len()).map(|_| rng.sample(StandardNormal)).collect();
            let d = MetricVector::new(n, row.to_vec()).unwrap();
            let (lo, hi) = chord(&d, &u, &body).unwrap();
            let scale = u.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let far = 10.0 / scale;
            let hi_b = bisect(&body, row, &u, 0.0, far);
            let lo_b = bisect(&body, row, &u, 0.0, -far);
            assert!((hi - hi_b).abs() < 1e-7, "upper {hi} vs {hi_b}");
            assert!((lo - lo_b).abs() < 1e-7, "lower {lo} vs {lo_b}");
            checked += 1;
        }
    }
    assert_eq!(checked, 10_000);
}
