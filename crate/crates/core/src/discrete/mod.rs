//! The discrete metric polytope `M_n^M`: integer metrics on `[n]` with
//! values in `{1,…,M}`, the ceiling map from `M_n`, and the hypergraph of
//! non-metric triangles.

mod count;
mod hypergraph;
mod supersat;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

pub use count::{count_discrete, count_discrete_with_workers, DiscreteCount, DEFAULT_NODE_BUDGET};
pub use hypergraph::{
    codegree, hypergraph_stats, is_non_metric, non_metric_triples, value_degree, HypergraphStats,
    Vertex, DEFAULT_HYPERGRAPH_BUDGET,
};
pub use supersat::{
    prime_subset, supersaturation_args, supersaturation_check, supersaturation_instance, SupersaturationReport,
};

use crate::error::{Error, Result};
use crate::exactvol::{serialize_rational, Q};
use crate::metric::{self, MetricVector, PairIndexer, DEFAULT_TOL};

/// An integer distance assignment on the pairs of `[n]` with values in
/// `{1,…,M}`. Construction checks the range only; see
/// [`is_metric`](Self::is_metric).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DiscreteRepr", into = "DiscreteRepr")]
pub struct DiscreteSpace {
    indexer: PairIndexer,
    values: Vec<u32>,
    m: u32,
}

#[derive(Serialize, Deserialize)]
struct DiscreteRepr {
    n: usize,
    #[serde(rename = "M")]
    m: u32,
    values: Vec<u32>,
}

impl TryFrom<DiscreteRepr> for DiscreteSpace {
    type Error = Error;

    fn try_from(r: DiscreteRepr) -> Result<Self> {
        DiscreteSpace::new(r.n, r.m, r.values)
    }
}

impl From<DiscreteSpace> for DiscreteRepr {
    fn from(d: DiscreteSpace) -> Self {
        DiscreteRepr {
            n: d.n(),
            m: d.m,
            values: d.values,
        }
    }
}

impl DiscreteSpace {
    pub fn new(n: usize, m: u32, values: Vec<u32>) -> Result<Self> {
        let indexer = PairIndexer::new(n)?;
        if m < 1 {
            return Err(Error::arg("M must be at least 1"));
        }
        if values.len() != indexer.dim() {
            return Err(Error::arg(format!(
                "expected {} values for n = {n}, got {}",
                indexer.dim(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v < 1 || v > m) {
            return Err(Error::arg(format!("value {v} outside 1..={m}")));
        }
        Ok(DiscreteSpace { indexer, values, m })
    }

    pub fn n(&self) -> usize {
        self.indexer.n()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn indexer(&self) -> PairIndexer {
        self.indexer
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Result<u32> {
        Ok(self.values[self.indexer.rank_sym(i, j)?])
    }

    /// First triangle `{i<j<k}` whose values break a triangle inequality.
    pub fn violated_triangle(&self) -> Option<(usize, usize, usize)> {
        let n = self.n();
        for i in 1..=n {
            for j in i + 1..=n {
                for k in j + 1..=n {
                    let ix = &self.indexer;
                    let a = self.values[ix.rank_unchecked(i, j)];
                    let b = self.values[ix.rank_unchecked(i, k)];
                    let c = self.values[ix.rank_unchecked(j, k)];
                    if is_non_metric(a, b, c) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn is_metric(&self) -> bool {
        self.violated_triangle().is_none()
    }

    pub fn to_csv_row(&self) -> String {
        let cells: Vec<String> = self.values.iter().map(u32::to_string).collect();
        cells.join(",")
    }
}

/// Every element of `M_n^M` as a [`DiscreteSpace`], ordered lexicographically
/// by flat values. Fails with the exact count when it exceeds `cap`.
pub fn enumerate_discrete(n: usize, m: u32, cap: usize) -> Result<Vec<DiscreteSpace>> {
    count::enumerate_values(n, m, cap)?
        .into_iter()
        .map(|v| DiscreteSpace::new(n, m, v))
        .collect()
}

/// `⌈x⌉`, treating values within a relative `1e-12` of an integer as that
/// integer.
fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `φ(d)_ij = ⌈M d_ij / 2⌉`, mapping `M_n` (with positive distances) into
/// `M_n^M`.
pub fn ceiling_map(d: &MetricVector, m: u32) -> Result<DiscreteSpace> {
    if m < 1 {
        return Err(Error::arg("M must be at least 1"));
    }
    let report = metric::is_metric(d, DEFAULT_TOL);
    if !report.inside {
        return Err(Error::arg("input is not in M_n"));
    }
    let mf = f64::from(m);
    let mut values = Vec::with_capacity(d.values().len());
    for (flat, &x) in d.values().iter().enumerate() {
        let v = snapped_ceil(mf * x / 2.0);
        if v < 1.0 {
            let (i, j) = d.indexer().unrank(flat)?;
            return Err(Error::arg(format!("d({i},{j}) = {x} maps below 1")));
        }
        values.push((v as u32).min(m));
    }
    let out = DiscreteSpace::new(d.n(), m, values)?;
    if let Some((i, j, k)) = out.violated_triangle() {
        return Err(Error::State(format!("image violates triangle ({i},{j},{k})")));
    }
    Ok(out)
}

/// Exact comparison `(M/2)^N Vol(M_n) ≤ |M_n^M| ≤ (M/2+1)^N Vol(M_n)`,
/// `N = C(n,2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(serialize_with = "serialize_rational")]
    pub volume: Q,
    #[serde(serialize_with = "serialize_biguint")]
    pub count: BigUint,
    #[serde(serialize_with = "serialize_rational")]
    pub lower: Q,
    #[serde(serialize_with = "serialize_rational")]
    pub upper: Q,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

fn serialize_biguint<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Sandwich comparison given a known count.
pub fn sandwich_from_count(n: usize, m: u32, vol: &Q, count: BigUint) -> Result<SandwichReport> {
    let dim = PairIndexer::new(n)?.dim();
    let half = Q::new(m.into(), 2.into());
    let lower = Pow::pow(&half, dim) * vol;
    let upper = Pow::pow(half + Q::one(), dim) * vol;
    let c = Q::from_integer(count.clone().into());
    Ok(SandwichReport {
        n,
        m,
        volume: vol.clone(),
        lower_holds: lower <= c,
        upper_holds: c <= upper,
        count,
        lower,
        upper,
    })
}

pub fn sandwich_check(n: usize, m: u32, vol: &Q) -> Result<SandwichReport> {
    let count = count_discrete(n, m, DEFAULT_NODE_BUDGET)?.count;
    sandwich_from_count(n, m, vol, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactvol::integer;

    #[test]
    fn enumerate_examples() {
        let one = enumerate_discrete(3, 1, 10).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].values(), &[1, 1, 1]);
        assert_eq!(enumerate_discrete(3, 2, 10).unwrap().len(), 8);
        let line = enumerate_discrete(2, 3, 10).unwrap();
        let flat: Vec<u32> = line.iter().map(|d| d.values()[0]).collect();
        assert_eq!(flat, vec![1, 2, 3]);
    }

    #[test]
    fn ceiling_examples() {
        let d = MetricVector::constant(3, 1.5).unwrap();
        assert_eq!(ceiling_map(&d, 4).unwrap().values(), &[3, 3, 3]);
        let d = MetricVector::new(3, vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(ceiling_map(&d, 2).unwrap().values(), &[2, 1, 1]);
        let d = MetricVector::new(3, vec![0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(ceiling_map(&d, 4), Err(Error::Argument(_))));
        let d = MetricVector::new(3, vec![2.0, 0.5, 0.5]).unwrap();
        assert!(ceiling_map(&d, 4).is_err());
    }

    #[test]
    fn ceiling_snaps_grid_points() {
        let d = MetricVector::new(3, vec![0.1 * 3.0, 0.3, 0.6]).unwrap();
        assert_eq!(ceiling_map(&d, 20).unwrap().values(), &[3, 3, 6]);
    }

    #[test]
    fn sandwich_examples() {
        let r = sandwich_check(3, 2, &integer(4)).unwrap();
        assert_eq!((r.lower.clone(), r.count.clone(), r.upper.clone()), (integer(4), 8u32.into(), integer(32)));
        assert!(r.holds());
        let r = sandwich_check(3, 4, &integer(4)).unwrap();
        assert_eq!((r.lower.clone(), r.upper.clone()), (integer(32), integer(108)));
        assert_eq!(r.count, 52u32.into());
        assert!(r.holds());
        let r = sandwich_check(2, 2, &integer(2)).unwrap();
        assert!(r.holds());
        assert_eq!(r.lower, integer(2));
    }

    #[test]
    fn space_validation() {
        assert!(DiscreteSpace::new(3, 3, vec![1, 2]).is_err());
        assert!(DiscreteSpace::new(3, 3, vec![1, 2, 4]).is_err());
        assert!(DiscreteSpace::new(3, 3, vec![0, 2, 2]).is_err());
        let d = DiscreteSpace::new(3, 3, vec![3, 1, 1]).unwrap();
        assert_eq!(d.violated_triangle(), Some((1, 2, 3)));
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"n":3,"M":3,"values":[3,1,1]}"#);
        assert_eq!(serde_json::from_str::<DiscreteSpace>(&json).unwrap(), d);
    }
}
