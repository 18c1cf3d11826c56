use metric_polytope::discrete::{
    ceiling_map, codegree, count_discrete, enumerate_discrete, hypergraph_stats, is_non_metric,
    sandwich_check, value_degree, Vertex, DEFAULT_NODE_BUDGET,
};
use metric_polytope::exactvol::metric_volume;
use metric_polytope::metric::PairIndexer;
use metric_polytope::sampler::{hit_and_run, ChainConfig};
use num_bigint::BigUint;
use proptest::prelude::*;

/// Every tuple in `[M]^{C(n,2)}` in lexicographic order, keeping the metric ones.
fn odometer(n: usize, m: u32) -> Vec<Vec<u32>> {
    let idx = PairIndexer::new(n).unwrap();
    let tri = idx.triangles();
    let mut v = vec![1u32; idx.dim()];
    let mut out = Vec::new();
    loop {
        if tri.iter().all(|&[a, b, c]| !is_non_metric(v[a], v[b], v[c])) {
            out.push(v.clone());
        }
        let mut k = v.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if v[k] < m {
                v[k] += 1;
                break;
            }
            v[k] = 1;
        }
    }
}

fn count(n: usize, m: u32) -> BigUint {
    count_discrete(n, m, DEFAULT_NODE_BUDGET).unwrap().count
}

#[test]
fn counts_match_odometer() {
    for (n, max_m) in [(3, 9), (4, 4), (5, 2)] {
        for m in 1..=max_m {
            assert_eq!(count(n, m), BigUint::from(odometer(n, m).len()), "n = {n}, M = {m}");
        }
    }
}

#[test]
fn enumeration_matches_odometer() {
    for (n, m) in [(3, 4), (4, 3), (2, 5)] {
        let listed: Vec<Vec<u32>> = enumerate_discrete(n, m, 100_000)
            .unwrap()
            .into_iter()
            .map(|d| d.values().to_vec())
            .collect();
        assert_eq!(listed, odometer(n, m));
    }
}

#[test]
fn two_values_never_violate() {
    for n in 2..=6 {
        let dim = n * (n - 1) / 2;
        assert_eq!(count(n, 2), BigUint::from(1u32) << dim);
    }
}

#[test]
fn sandwich_grid() {
    for n in 2..=4 {
        let vol = metric_volume(n, false).unwrap();
        for m in [2, 4] {
            let r = sandwich_check(n, m, &vol).unwrap();
            assert!(r.holds(), "{r:?}");
        }
    }
}

/// Every assignment with values in `{M/2, …, M}` is metric, so the even-M
/// ratio `|M_n^M| / (M/2+1)^{C(n,2)}` is at least 1, with equality at `M = 2`.
/// At `M = 4` it still grows over the computable range.
#[test]
fn even_m_ratio() {
    let ratio = |n: usize, m: u32| {
        let dim = (n * (n - 1) / 2) as i32;
        let c: f64 = count(n, m).to_string().parse().unwrap();
        c / f64::from(m / 2 + 1).powi(dim)
    };
    for n in 3..=7 {
        assert_eq!(ratio(n, 2), 1.0);
    }
    let r4: Vec<f64> = (3..=6).map(|n| ratio(n, 4)).collect();
    assert!(r4.iter().all(|&r| r >= 1.0), "{r4:?}");
    assert!((r4[0] - 52.0 / 27.0).abs() < 1e-12);
    assert!((r4[1] - 2030.0 / 729.0).abs() < 1e-12);
}

#[test]
fn ceiling_images_are_metric() {
    for n in [3, 4] {
        let batch = hit_and_run(&ChainConfig::new(n, 31), 10_000).unwrap();
        for m in [2, 4, 8] {
            for i in 0..batch.len() {
                let d = ceiling_map(&batch.sample(i), m).unwrap();
                assert!(d.is_metric());
            }
        }
    }
}

#[test]
fn max_degree_at_extreme_values() {
    for n in [3, 4] {
        for m in 1..=10 {
            let s = hypergraph_stats(n, m, u64::MAX).unwrap();
            assert!(s.delta1_values.iter().any(|&v| v == 1 || v == m), "{s:?}");
            let scan = (1..=m).map(|v| value_degree(n, m, &Vertex::new(1, 2, v)).unwrap()).max().unwrap();
            assert_eq!(scan, s.delta1);
            if s.edge_count > 0 {
                assert!(s.delta1 >= s.delta2 && s.delta2 >= s.delta3 && s.delta3 == 1);
            } else {
                assert_eq!((s.delta1, s.delta2, s.delta3), (0, 0, 0));
            }
        }
    }
}

#[test]
fn codegree_by_direct_scan() {
    let m = 5;
    for (a, b) in [(1, 1), (1, 4), (2, 5), (5, 5)] {
        let direct = (1..=m).filter(|&c| is_non_metric(a, b, c)).count() as u64;
        let got = codegree(3, m, &Vertex::new(1, 2, a), &Vertex::new(1, 3, b)).unwrap();
        assert_eq!(got, direct);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn worker_count_does_not_change_count(n in 4usize..=5, m in 1u32..=4, w in 1usize..=4) {
        let a = metric_polytope::discrete::count_discrete_with_workers(n, m, DEFAULT_NODE_BUDGET, Some(w)).unwrap();
        let b = count_discrete(n, m, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert_eq!(a, b);
    }
}
