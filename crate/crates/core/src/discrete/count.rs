//! Backtracking over integer metrics on `[n]` with values in `{1,…,M}`.
//!
//! Points are added one at a time; the distances from point `k` to points
//! `0..k` are assigned in increasing order of the earlier point. Each pending
//! edge `(j,k)` carries the interval `[max |d(i,j) − d(i,k)|, min d(i,j) + d(i,k)]`
//! over the already assigned `i < j`, tightened as soon as `d(i,k)` is fixed,
//! so a branch dies as soon as any pending interval empties. The final edge
//! of the final point is counted in bulk.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::PairIndexer;

pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000_000;

const FLUSH_EVERY: u64 = 1 << 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscreteCount {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(serialize_with = "decimal")]
    pub count: BigUint,
    pub nodes_explored: u64,
}

fn decimal<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

struct Shared {
    budget: u64,
    nodes: AtomicU64,
    stop: AtomicBool,
}

impl Shared {
    fn new(budget: u64) -> Self {
        Shared {
            budget,
            nodes: AtomicU64::new(0),
            stop: AtomicBool::new(false),
        }
    }
}

struct Search<'a> {
    n: usize,
    m: u32,
    dist: Vec<u32>,
    /// Pending intervals, indexed by (point, edge level, target edge).
    lo: Vec<u32>,
    hi: Vec<u32>,
    nodes: u64,
    unflushed: u64,
    shared: &'a Shared,
    found: Option<Vec<Vec<u32>>>,
}

impl<'a> Search<'a> {
    fn new(n: usize, m: u32, shared: &'a Shared, collect: bool) -> Self {
        Search {
            n,
            m,
            dist: vec![0; n * n],
            lo: vec![0; n * n * n],
            hi: vec![0; n * n * n],
            nodes: 0,
            unflushed: 0,
            shared,
            found: collect.then(Vec::new),
        }
    }

    #[inline]
    fn d(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.n + j]
    }

    #[inline]
    fn slot(&self, k: usize, level: usize, j: usize) -> usize {
        (k * self.n + level) * self.n + j
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: u32) {
        self.dist[i * self.n + j] = v;
        self.dist[j * self.n + i] = v;
    }

    fn tick(&mut self, by: u64) -> bool {
        self.nodes += by;
        self.unflushed += by;
        if self.unflushed >= FLUSH_EVERY {
            self.flush();
        }
        !self.shared.stop.load(Ordering::Relaxed)
    }

    fn flush(&mut self) {
        let total = self.shared.nodes.fetch_add(self.unflushed, Ordering::Relaxed) + self.unflushed;
        self.unflushed = 0;
        if total > self.shared.budget {
            self.shared.stop.store(true, Ordering::Relaxed);
        }
    }

    fn point(&mut self, k: usize) -> u128 {
        if k == self.n {
            if let Some(found) = self.found.as_mut() {
                let n = self.n;
                let idx = PairIndexer::new(n).expect("n >= 2");
                let mut flat = vec![0; idx.dim()];
                for (r, (i, j)) in idx.pairs().enumerate() {
                    flat[r] = self.dist[(i - 1) * n + (j - 1)];
                }
                found.push(flat);
            }
            return 1;
        }
        for j in 0..k {
            let s = self.slot(k, 0, j);
            self.lo[s] = 1;
            self.hi[s] = self.m;
        }
        self.edge(k, 0)
    }

    /// Assigns `d(j,k)` given the pending intervals at level `j`.
    fn edge(&mut self, k: usize, j: usize) -> u128 {
        let here = self.slot(k, j, j);
        let (lo, hi) = (self.lo[here], self.hi[here]);
        if j + 1 == k && k + 1 == self.n && self.found.is_none() {
            self.tick(1);
            return u128::from(hi - lo + 1);
        }
        let mut total = 0u128;
        for v in lo..=hi {
            if !self.tick(1) {
                return total;
            }
            self.set(j, k, v);
            if j + 1 == k {
                total += self.point(k + 1);
                continue;
            }
            let mut ok = true;
            for jj in j + 1..k {
                let a = self.d(j, jj);
                let (cur, next) = (self.slot(k, j, jj), self.slot(k, j + 1, jj));
                let l = self.lo[cur].max(a.abs_diff(v));
                let h = self.hi[cur].min(a + v);
                if l > h {
                    ok = false;
                    break;
                }
                self.lo[next] = l;
                self.hi[next] = h;
            }
            if ok {
                total += self.edge(k, j + 1);
            }
        }
        total
    }
}

fn check_args(n: usize, m: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::arg(format!("need at least 2 points, got n = {n}")));
    }
    if m < 1 {
        return Err(Error::arg("M must be at least 1"));
    }
    Ok(())
}

/// Metric value triples for the first triangle, in `(d01, d02, d12)` order.
fn seed_triangles(m: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 1..=m {
        for b in 1..=m {
            for c in a.abs_diff(b).max(1)..=(a + b).min(m) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// `|M_n^M|`, the number of metrics on `[n]` with values in `{1,…,M}`.
///
/// Subtrees below the first triangle are searched in parallel on the global
/// rayon pool; the count and `nodes_explored` do not depend on scheduling.
pub fn count_discrete(n: usize, m: u32, budget: u64) -> Result<DiscreteCount> {
    count_discrete_with_workers(n, m, budget, None)
}

pub fn count_discrete_with_workers(
    n: usize,
    m: u32,
    budget: u64,
    workers: Option<usize>,
) -> Result<DiscreteCount> {
    check_args(n, m)?;
    if n == 2 {
        return Ok(DiscreteCount {
            n,
            m,
            count: BigUint::from(m),
            nodes_explored: 1,
        });
    }
    if n == 3 {
        let mut count = 0u128;
        for a in 1..=m {
            for b in 1..=m {
                count += u128::from((a + b).min(m) - a.abs_diff(b).max(1) + 1);
            }
        }
        return Ok(DiscreteCount {
            n,
            m,
            count: BigUint::from(count),
            nodes_explored: u64::from(m) * u64::from(m),
        });
    }
    let seeds = seed_triangles(m);
    let shared = Shared::new(budget);
    let run = || {
        seeds
            .par_iter()
            .map(|&[a, b, c]| {
                let mut s = Search::new(n, m, &shared, false);
                s.set(0, 1, a);
                s.set(0, 2, b);
                s.set(1, 2, c);
                let count = s.point(3);
                s.flush();
                (count, s.nodes + 1)
            })
            .collect::<Vec<_>>()
    };
    let parts = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::arg(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let count = parts.iter().fold(BigUint::ZERO, |acc, &(c, _)| acc + c);
    let nodes_explored = parts.iter().map(|&(_, k)| k).sum();
    if shared.stop.load(Ordering::Relaxed) {
        return Err(Error::Budget {
            budget,
            nodes_explored,
            partial: count,
        });
    }
    Ok(DiscreteCount {
        n,
        m,
        count,
        nodes_explored,
    })
}

/// Flat value vectors of every metric on `[n]` with values in `{1,…,M}`,
/// sorted lexicographically. Fails with the exact count if it exceeds `cap`.
pub(crate) fn enumerate_values(n: usize, m: u32, cap: usize) -> Result<Vec<Vec<u32>>> {
    let total = count_discrete(n, m, DEFAULT_NODE_BUDGET)?.count;
    if total > BigUint::from(cap) {
        return Err(Error::Capacity { count: total, cap });
    }
    let mut out = if n == 2 {
        (1..=m).map(|v| vec![v]).collect()
    } else {
        let shared = Shared::new(u64::MAX);
        let mut s = Search::new(n, m, &shared, true);
        s.point(1);
        s.found.take().unwrap_or_default()
    };
    out.sort_unstable();
    Ok(out)
}
