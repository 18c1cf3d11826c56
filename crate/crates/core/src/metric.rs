//! Pair indexing, distance vectors, membership in the closed metric polytope
//! and the scalar diagnostics used throughout the crate.
//!
//! Points are 1-based. The `C(n,2)` unordered pairs `{i,j}`, `i < j`, are laid
//! out lexicographically: `(1,2), (1,3), …, (1,n), (2,3), …, (n-1,n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper end of the diameter box `[0, 2]`.
pub const DIAMETER: f64 = 2.0;

/// Default slack for floating membership tests.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Bijection between unordered pairs of `[n]` and `0..C(n,2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairIndexer {
    n: usize,
    dim: usize,
}

impl PairIndexer {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg(format!("need at least 2 points, got n = {n}")));
        }
        Ok(PairIndexer {
            n,
            dim: n * (n - 1) / 2,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat index of the pair `{i, j}` with `1 <= i < j <= n`.
    pub fn rank(&self, i: usize, j: usize) -> Result<usize> {
        if i == 0 || j > self.n || i >= j {
            return Err(Error::arg(format!(
                "pair ({i},{j}) is not 1 <= i < j <= {}",
                self.n
            )));
        }
        Ok(self.rank_unchecked(i, j))
    }

    /// Like [`rank`](Self::rank) but accepts the pair in either order.
    pub fn rank_sym(&self, i: usize, j: usize) -> Result<usize> {
        if i < j {
            self.rank(i, j)
        } else {
            self.rank(j, i)
        }
    }

    #[inline]
    pub(crate) fn rank_unchecked(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        (i - 1) * (2 * self.n - i) / 2 + (j - i - 1)
    }

    pub fn unrank(&self, index: usize) -> Result<(usize, usize)> {
        if index >= self.dim {
            return Err(Error::arg(format!(
                "flat index {index} out of range 0..{}",
                self.dim
            )));
        }
        let mut rest = index;
        let mut i = 1;
        while rest >= self.n - i {
            rest -= self.n - i;
            i += 1;
        }
        Ok((i, i + 1 + rest))
    }

    /// All pairs in flat-index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (1..n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
    }

    /// All triangles `{i < j < k}` as triples of flat indices
    /// `(rank(i,j), rank(i,k), rank(j,k))`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * (n - 1) * (n.saturating_sub(2)) / 6);
        for i in 1..=n {
            for j in i + 1..=n {
                for k in j + 1..=n {
                    out.push([
                        self.rank_unchecked(i, j),
                        self.rank_unchecked(i, k),
                        self.rank_unchecked(j, k),
                    ]);
                }
            }
        }
        out
    }
}

/// A real distance assignment on the pairs of `[n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricVectorRepr", into = "MetricVectorRepr")]
pub struct MetricVector {
    indexer: PairIndexer,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetricVectorRepr {
    n: usize,
    values: Vec<f64>,
}

impl TryFrom<MetricVectorRepr> for MetricVector {
    type Error = Error;

    fn try_from(r: MetricVectorRepr) -> Result<Self> {
        MetricVector::new(r.n, r.values)
    }
}

impl From<MetricVector> for MetricVectorRepr {
    fn from(d: MetricVector) -> Self {
        MetricVectorRepr {
            n: d.indexer.n,
            values: d.values,
        }
    }
}

impl MetricVector {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let indexer = PairIndexer::new(n)?;
        Self::with_indexer(indexer, values)
    }

    pub fn with_indexer(indexer: PairIndexer, values: Vec<f64>) -> Result<Self> {
        if values.len() != indexer.dim {
            return Err(Error::arg(format!(
                "expected {} distances for n = {}, got {}",
                indexer.dim,
                indexer.n,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("distance at flat index {pos} is not finite")));
        }
        Ok(MetricVector { indexer, values })
    }

    /// Every coordinate equal to `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        let indexer = PairIndexer::new(n)?;
        Self::with_indexer(indexer, vec![value; indexer.dim])
    }

    #[inline]
    pub fn indexer(&self) -> PairIndexer {
        self.indexer
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.indexer.n
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `d(i, j)` for distinct 1-based points in either order.
    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.values[self.indexer.rank_sym(i, j)?])
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.indexer.rank_unchecked(i, j)]
    }

    /// The distance vector of the relabeled space `d'(σ(i), σ(j)) = d(i, j)`,
    /// where `perm[i-1] = σ(i)` is a permutation of `1..=n`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n + 1];
        if perm.len() != n
            || perm.iter().any(|&p| {
                if p == 0 || p > n || seen[p] {
                    true
                } else {
                    seen[p] = true;
                    false
                }
            })
        {
            return Err(Error::arg("relabeling is not a permutation of 1..=n"));
        }
        let mut values = vec![0.0; self.indexer.dim];
        for (flat, (i, j)) in self.indexer.pairs().enumerate() {
            values[self.indexer.rank_unchecked(perm[i - 1], perm[j - 1])] = self.values[flat];
        }
        Ok(MetricVector {
            indexer: self.indexer,
            values,
        })
    }
}

/// Outcome of a membership test against the closed metric polytope.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MembershipReport {
    pub inside: bool,
    /// `(i, j, k)` with `d(i,j) > d(i,k) + d(k,j) + tol`, `i < j`.
    pub violated_triangles: Vec<(usize, usize, usize)>,
    /// Pairs whose distance falls outside `[-tol, 2 + tol]`.
    pub out_of_box_pairs: Vec<(usize, usize)>,
}

/// Membership in the closure of `M_n`: `0 <= d_ij <= 2` and every triangle
/// inequality, each with slack `tol`.
pub fn is_metric(d: &MetricVector, tol: f64) -> MembershipReport {
    let n = d.n();
    let mut report = MembershipReport::default();
    for (flat, (i, j)) in d.indexer.pairs().enumerate() {
        let v = d.values[flat];
        if v < -tol || v > DIAMETER + tol {
            report.out_of_box_pairs.push((i, j));
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            let long = d.at(i, j);
            for k in (1..=n).filter(|&k| k != i && k != j) {
                if long > d.at(i, k) + d.at(k, j) + tol {
                    report.violated_triangles.push((i, j, k));
                }
            }
        }
    }
    report.inside = report.violated_triangles.is_empty() && report.out_of_box_pairs.is_empty();
    report
}

/// Early-exit membership check for hot loops.
pub fn is_metric_fast(values: &[f64], triangles: &[[usize; 3]], low: f64, high: f64, tol: f64) -> bool {
    if values.iter().any(|&v| v < low - tol || v > high + tol) {
        return false;
    }
    triangles.iter().all(|&[a, b, c]| triangle_ok(values[a], values[b], values[c], tol))
}

#[inline]
pub(crate) fn triangle_ok(x: f64, y: f64, z: f64, tol: f64) -> bool {
    x <= y + z + tol && y <= x + z + tol && z <= x + y + tol
}

/// `∏_{i ∈ A} 2·min_{j ≠ i} d(i, j)`; the empty product is 1.
pub fn f_quantity(d: &MetricVector, points: &[usize]) -> Result<f64> {
    let n = d.n();
    if let Some(&bad) = points.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::arg(format!("point {bad} outside 1..={n}")));
    }
    let mut prod = 1.0;
    for &i in points {
        let nearest = (1..=n)
            .filter(|&j| j != i)
            .map(|j| d.at(i, j))
            .fold(f64::INFINITY, f64::min);
        prod *= 2.0 * nearest;
    }
    Ok(prod)
}

/// Pairs with distance strictly below `threshold`, in flat-index order.
pub fn short_pairs(d: &MetricVector, threshold: f64) -> Vec<(usize, usize)> {
    d.indexer
        .pairs()
        .zip(&d.values)
        .filter(|&(_, &v)| v < threshold)
        .map(|(p, _)| p)
        .collect()
}

/// `{ j != i : d(i, j) < threshold }`, ascending.
pub fn close_neighbors(d: &MetricVector, i: usize, threshold: f64) -> Result<Vec<usize>> {
    let n = d.n();
    if i == 0 || i > n {
        return Err(Error::arg(format!("point {i} outside 1..={n}")));
    }
    Ok((1..=n)
        .filter(|&j| j != i && d.at(i, j) < threshold)
        .collect())
}

pub fn min_distance(d: &MetricVector) -> f64 {
    d.values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Whether the box `∏ [a_i, b_i]` lies in the closure of `M_3`, and its volume.
///
/// Coordinates are ordered `(d12, d13, d23)`. A box is contained iff for each
/// triangle inequality its worst corner (long edge at its upper end, the other
/// two at their lower ends) satisfies it.
pub fn box_in_m3_check(a: [f64; 3], b: [f64; 3]) -> Result<(bool, f64)> {
    for k in 0..3 {
        if !(a[k].is_finite() && b[k].is_finite()) {
            return Err(Error::arg("box endpoints must be finite"));
        }
        if a[k] > b[k] {
            return Err(Error::arg(format!(
                "box side {k} has lower end {} above upper end {}",
                a[k], b[k]
            )));
        }
    }
    let in_box = a.iter().all(|&x| x >= 0.0) && b.iter().all(|&x| x <= DIAMETER);
    let contained =
        in_box && b[0] <= a[1] + a[2] && b[1] <= a[0] + a[2] && b[2] <= a[0] + a[1];
    let volume = (0..3).map(|k| b[k] - a[k]).product();
    Ok((contained, volume))
}

/// CSV header `d_1_2,d_1_3,…` for `n` points.
pub fn csv_header(n: usize) -> Result<String> {
    let idx = PairIndexer::new(n)?;
    Ok(idx
        .pairs()
        .map(|(i, j)| format!("d_{i}_{j}"))
        .collect::<Vec<_>>()
        .join(","))
}

impl MetricVector {
    /// One CSV row in flat-index order. Uses the shortest round-tripping
    /// decimal form so rows parse back to identical values.
    pub fn to_csv_row(&self) -> String {
        self.values
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(n: usize, row: &str) -> Result<Self> {
        let values = row
            .trim()
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad distance {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MetricVector::new(n, values)
    }
}
