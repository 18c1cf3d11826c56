use std::collections::BTreeSet;

use metric_polytope::exactvol::{
    build_halfspaces, clip, enumerate_vertices, exact_volume, integer, is_metric_exact,
    metric_volume, radius, rational, RationalHalfspace, RationalPolytope, Q,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn det3(m: &[[Q; 3]; 3]) -> Q {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// Vertices of a 3-dimensional H-polytope by solving every 3×3 subsystem
/// with Cramer's rule and keeping the feasible solutions.
fn brute_force_vertices(hs: &[RationalHalfspace]) -> BTreeSet<Vec<Q>> {
    let mut out = BTreeSet::new();
    for a in 0..hs.len() {
        for b in a + 1..hs.len() {
            for c in b + 1..hs.len() {
                let rows = [&hs[a], &hs[b], &hs[c]];
                let m: [[Q; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|k| rows[r].normal()[k].clone()));
                let det = det3(&m);
                if det.is_zero() {
                    continue;
                }
                let x: Vec<Q> = (0..3)
                    .map(|col| {
                        let mut mc = m.clone();
                        for r in 0..3 {
                            mc[r][col] = rows[r].offset().clone();
                        }
                        det3(&mc) / &det
                    })
                    .collect();
                if hs.iter().all(|h| h.contains(&x)) {
                    out.insert(x);
                }
            }
        }
    }
    out
}

#[test]
fn m3_vertices_match_brute_force() {
    let poly = RationalPolytope::metric(3).unwrap();
    let dd: BTreeSet<Vec<Q>> = enumerate_vertices(&poly).unwrap().into_iter().collect();
    let oracle = brute_force_vertices(poly.halfspaces());
    assert_eq!(dd, oracle);
    assert_eq!(dd.len(), 5);
}

#[test]
fn clipped_m3_vertices_match_brute_force() {
    for (num, den) in [(1, 2), (1, 1), (3, 2), (7, 5)] {
        let base = RationalPolytope::metric(3).unwrap();
        let h = RationalHalfspace::upper(3, 0, rational(num, den)).unwrap();
        let clipped = clip(&base, h).unwrap();
        let dd: BTreeSet<Vec<Q>> = enumerate_vertices(&clipped).unwrap().into_iter().collect();
        assert_eq!(dd, brute_force_vertices(clipped.halfspaces()), "t = {num}/{den}");
    }
}

#[test]
fn m4_vertices_are_exact_members() {
    let poly = RationalPolytope::metric(4).unwrap();
    let verts = enumerate_vertices(&poly).unwrap();
    assert!(!verts.is_empty());
    for v in &verts {
        assert!(is_metric_exact(4, v).unwrap(), "{v:?}");
        let tight = poly.halfspaces().iter().filter(|h| h.slack(v).is_zero()).count();
        assert!(tight >= 6, "vertex {v:?} is tight on only {tight} facets");
    }
}

#[test]
fn volume_bounds_and_radius() {
    let v3 = metric_volume(3, false).unwrap();
    let v4 = metric_volume(4, false).unwrap();
    assert_eq!(v3, integer(4));
    assert_eq!(v4, rational(136, 15));
    for v in [&v3, &v4] {
        assert!(*v >= Q::one());
    }
    assert!(v4 <= integer(16));
    let r: Vec<f64> = (2..=4).map(|n| radius(n, false).unwrap()).collect();
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
}

#[test]
fn halfspace_layout() {
    let hs = build_halfspaces(4, &integer(0), &integer(2)).unwrap();
    assert_eq!(hs.len(), 3 * 4 + 2 * 6);
}

fn cuts() -> impl Strategy<Value = Vec<Q>> {
    prop::collection::btree_set(1i64..40, 0..=3).prop_map(|s| {
        let mut v = vec![integer(0)];
        v.extend(s.into_iter().map(|k| rational(k, 20)));
        v.push(integer(2));
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn box_partitions_are_additive(c0 in cuts(), c1 in cuts(), c2 in cuts()) {
        let base = RationalPolytope::metric(3).unwrap();
        let mut total = Q::zero();
        for w0 in c0.windows(2) {
            for w1 in c1.windows(2) {
                for w2 in c2.windows(2) {
                    let mut poly = base.clone();
                    for (axis, w) in [w0, w1, w2].into_iter().enumerate() {
                        poly = clip(&poly, RationalHalfspace::lower(3, axis, w[0].clone()).unwrap()).unwrap();
                        poly = clip(&poly, RationalHalfspace::upper(3, axis, w[1].clone()).unwrap()).unwrap();
                    }
                    for v in poly.vertices() {
                        prop_assert!(poly.halfspaces().iter().all(|h| h.contains(v)));
                    }
                    total += exact_volume(&poly).value;
                }
            }
        }
        prop_assert_eq!(total, integer(4));
    }

    #[test]
    fn clip_halves_sum_to_whole(num in 0i64..=60, den in 1i64..=30) {
        prop_assume!(num <= 2 * den);
        let t = rational(num, den);
        let base = RationalPolytope::metric(3).unwrap();
        let below = clip(&base, RationalHalfspace::upper(3, 0, t.clone()).unwrap()).unwrap();
        let above = clip(&base, RationalHalfspace::lower(3, 0, t).unwrap()).unwrap();
        prop_assert_eq!(exact_volume(&below).value + exact_volume(&above).value, integer(4));
    }
}
