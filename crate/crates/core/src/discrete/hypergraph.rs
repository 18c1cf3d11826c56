//! The 3-uniform hypergraph `H_n^M` of non-metric triangles.
//!
//! Vertices are `(pair, value)` with `pair ∈ C([n],2)` and `value ∈ [M]`.
//! Three vertices form an edge when their pairs are the sides of one
//! triangle and their values are a non-metric triple.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::PairIndexer;

pub const DEFAULT_HYPERGRAPH_BUDGET: u64 = 2_000_000_000;

/// Some value exceeds the sum of the other two.
#[inline]
pub fn is_non_metric(a: u32, b: u32, c: u32) -> bool {
    a > b + c || b > a + c || c > a + b
}

/// Ordered non-metric triples in `[M]^3`.
pub fn non_metric_triples(m: u32) -> u64 {
    let mut count = 0;
    for a in 1..=m {
        for b in 1..=m {
            count += (1..=m).filter(|&c| is_non_metric(a, b, c)).count() as u64;
        }
    }
    count
}

/// A vertex of `H_n^M`; points are 1-based with `pair.0 < pair.1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Vertex {
    pub pair: (usize, usize),
    pub value: u32,
}

impl Vertex {
    pub fn new(i: usize, j: usize, value: u32) -> Self {
        let pair = if i < j { (i, j) } else { (j, i) };
        Vertex { pair, value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypergraphStats {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub vertex_count: u64,
    pub edge_count: u64,
    pub delta1: u64,
    pub delta2: u64,
    pub delta3: u64,
    /// Values `v` such that some vertex `(e, v)` has degree `delta1`.
    pub delta1_values: Vec<u32>,
}

struct Meter {
    budget: u64,
    used: u64,
}

impl Meter {
    fn spend(&mut self, ops: u64, partial: u64) -> Result<()> {
        self.used += ops;
        if self.used > self.budget {
            return Err(Error::Budget {
                budget: self.budget,
                nodes_explored: self.used,
                partial: BigUint::from(partial),
            });
        }
        Ok(())
    }
}

fn check(n: usize, m: u32) -> Result<PairIndexer> {
    if n < 3 {
        return Err(Error::arg(format!("hypergraph needs n >= 3, got {n}")));
    }
    if m < 1 {
        return Err(Error::arg("M must be at least 1"));
    }
    PairIndexer::new(n)
}

fn check_vertex(n: usize, m: u32, v: &Vertex) -> Result<()> {
    let (i, j) = v.pair;
    if i == 0 || i >= j || j > n || v.value < 1 || v.value > m {
        return Err(Error::arg(format!("vertex {v:?} not in H_{n}^{m}")));
    }
    Ok(())
}

/// Number of edges containing the vertex, by scanning every triangle on its
/// pair and every value assignment of the other two sides.
pub fn value_degree(n: usize, m: u32, v: &Vertex) -> Result<u64> {
    check(n, m)?;
    check_vertex(n, m, v)?;
    let (i, j) = v.pair;
    let mut deg = 0;
    for _k in (1..=n).filter(|&k| k != i && k != j) {
        for x in 1..=m {
            deg += (1..=m).filter(|&y| is_non_metric(v.value, x, y)).count() as u64;
        }
    }
    Ok(deg)
}

/// Number of edges containing both vertices.
pub fn codegree(n: usize, m: u32, a: &Vertex, b: &Vertex) -> Result<u64> {
    check(n, m)?;
    check_vertex(n, m, a)?;
    check_vertex(n, m, b)?;
    let (p, q) = (a.pair, b.pair);
    let shared = [p.0, p.1].into_iter().filter(|x| *x == q.0 || *x == q.1).count();
    if p == q || shared != 1 {
        return Ok(0);
    }
    Ok((1..=m).filter(|&c| is_non_metric(a.value, b.value, c)).count() as u64)
}

/// Vertex and edge counts and the maximum degrees `Δ_1, Δ_2, Δ_3`, each by
/// direct counting. `budget` bounds the number of elementary value checks.
pub fn hypergraph_stats(n: usize, m: u32, budget: u64) -> Result<HypergraphStats> {
    let idx = check(n, m)?;
    let mut meter = Meter { budget, used: 0 };
    let m3 = u64::from(m).pow(3);

    let mut edge_count = 0u64;
    let mut delta3 = 0u64;
    for _ in idx.triangles() {
        meter.spend(m3, edge_count)?;
        for a in 1..=m {
            for b in 1..=m {
                for c in 1..=m {
                    if is_non_metric(a, b, c) {
                        edge_count += 1;
                        delta3 = 1;
                    }
                }
            }
        }
    }

    let mut delta1 = 0u64;
    let mut delta1_values = Vec::new();
    for (i, j) in idx.pairs() {
        for value in 1..=m {
            meter.spend(u64::from(m).pow(2) * (n as u64 - 2), edge_count)?;
            let d = value_degree(n, m, &Vertex::new(i, j, value))?;
            if d > delta1 {
                delta1 = d;
                delta1_values.clear();
            }
            if d == delta1 && !delta1_values.contains(&value) {
                delta1_values.push(value);
            }
        }
    }
    delta1_values.sort_unstable();

    let mut delta2 = 0u64;
    let pairs: Vec<(usize, usize)> = idx.pairs().collect();
    for (s, &p) in pairs.iter().enumerate() {
        for &q in &pairs[s + 1..] {
            for va in 1..=m {
                meter.spend(u64::from(m) * u64::from(m), edge_count)?;
                for vb in 1..=m {
                    let c = codegree(n, m, &Vertex::new(p.0, p.1, va), &Vertex::new(q.0, q.1, vb))?;
                    delta2 = delta2.max(c);
                }
            }
        }
    }

    Ok(HypergraphStats {
        n,
        m,
        vertex_count: idx.dim() as u64 * u64::from(m),
        edge_count,
        delta1,
        delta2,
        delta3,
        delta1_values,
    })
}
