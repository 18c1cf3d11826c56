use metric_polytope::metric::{
    box_in_m3_check, f_quantity, is_metric, min_distance, short_pairs, MetricVector,
};
use proptest::prelude::*;

/// Shortest-path closure of arbitrary positive weights, scaled into `[0, 2]`.
fn metric_from_weights(n: usize, w: &[f64]) -> MetricVector {
    let mut d = vec![vec![0.0; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            d[i][j] = w[k];
            d[j][i] = w[k];
            k += 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][m] + d[m][j] < d[i][j] {
                    d[i][j] = d[i][m] + d[m][j];
                }
            }
        }
    }
    let mut values = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            values.push(d[i][j]);
        }
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    for v in &mut values {
        *v *= 2.0 / max;
    }
    MetricVector::new(n, values).unwrap()
}

fn points_and_values() -> impl Strategy<Value = (usize, Vec<f64>, Vec<usize>)> {
    (3usize..=7).prop_flat_map(|n| {
        let dim = n * (n - 1) / 2;
        (
            Just(n),
            prop::collection::vec(0.0f64..=2.0, dim),
            Just((1..=n).collect::<Vec<_>>()).prop_shuffle(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn relabeling_invariance((n, values, perm) in points_and_values(), t in 0.0f64..2.0) {
        let d = MetricVector::new(n, values).unwrap();
        let p = d.relabel(&perm).unwrap();
        prop_assert_eq!(is_metric(&d, 1e-12).inside, is_metric(&p, 1e-12).inside);
        prop_assert_eq!(min_distance(&d), min_distance(&p));
        prop_assert_eq!(short_pairs(&d, t).len(), short_pairs(&p, t).len());
        let all: Vec<usize> = (1..=n).collect();
        let (a, b) = (f_quantity(&d, &all).unwrap(), f_quantity(&p, &all).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn shortest_path_metrics_are_inside(
        (n, w) in (3usize..=8).prop_flat_map(|n| (Just(n), prop::collection::vec(0.01f64..1.0, n * (n - 1) / 2)))
    ) {
        let d = metric_from_weights(n, &w);
        prop_assert!(is_metric(&d, 1e-12).inside);
    }

    #[test]
    fn box_check_agrees_with_grid_oracle(
        a in prop::array::uniform3(0.0f64..2.0),
        len in prop::array::uniform3(0.0f64..2.0),
    ) {
        let b = [0, 1, 2].map(|k| (a[k] + len[k]).min(2.0));
        let (contained, _) = box_in_m3_check(a, b).unwrap();
        let mut grid_ok = true;
        'grid: for i in 0..=20 {
            for j in 0..=20 {
                for k in 0..=20 {
                    let p: Vec<f64> = [i, j, k]
                        .into_iter()
                        .zip(0..3)
                        .map(|(s, c)| a[c] + (b[c] - a[c]) * s as f64 / 20.0)
                        .collect();
                    let d = MetricVector::new(3, p).unwrap();
                    if !is_metric(&d, 1e-12).inside {
                        grid_ok = false;
                        break 'grid;
                    }
                }
            }
        }
        prop_assert_eq!(contained, grid_ok);
    }
}

#[test]
fn cube_points_are_metric() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for n in 3..=10 {
        let dim = n * (n - 1) / 2;
        for _ in 0..10_000 {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(1.0..=2.0)).collect();
            let d = MetricVector::new(n, v).unwrap();
            assert!(is_metric(&d, 0.0).inside);
        }
    }
}

#[test]
fn unit_cube_is_the_largest_box() {
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 20.0).collect();
    let sides: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, &lo)| grid[i..].iter().map(move |&hi| (lo, hi)))
        .collect();
    let mut best = 0.0f64;
    let mut argmax = Vec::new();
    for &s0 in &sides {
        for &s1 in &sides {
            for &s2 in &sides {
                let vol = (s0.1 - s0.0) * (s1.1 - s1.0) * (s2.1 - s2.0);
                if vol + 1e-9 < best {
                    continue;
                }
                let (ok, _) = box_in_m3_check([s0.0, s1.0, s2.0], [s0.1, s1.1, s2.1]).unwrap();
                if !ok {
                    continue;
                }
                if vol > best + 1e-9 {
                    best = vol;
                    argmax.clear();
                }
                argmax.push([s0, s1, s2]);
            }
        }
    }
    assert!((best - 1.0).abs() < 1e-9, "best contained volume {best}");
    assert_eq!(argmax.len(), 1);
    for (lo, hi) in argmax[0] {
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 2.0).abs() < 1e-9);
    }
}
