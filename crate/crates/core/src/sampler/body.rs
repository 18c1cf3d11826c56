use crate::error::{Error, Result};
use crate::metric::{is_metric_fast, MetricVector, PairIndexer};

/// `M_n ∩ [low, high]^dim` in floating point, laid out for the chord oracle.
#[derive(Clone, Debug)]
pub struct Body {
    indexer: PairIndexer,
    low: f64,
    high: f64,
    triangles: Vec<[usize; 3]>,
    /// For each coordinate, the other two edges of every triangle through it.
    neighbors: Vec<Vec<(usize, usize)>>,
}

impl Body {
    pub fn new(n: usize, low: f64, high: f64) -> Result<Self> {
        let indexer = PairIndexer::new(n)?;
        if !(low.is_finite() && high.is_finite()) || low >= high {
            return Err(Error::arg(format!("empty box [{low}, {high}]")));
        }
        let triangles = indexer.triangles();
        let mut neighbors = vec![Vec::with_capacity(n.saturating_sub(2)); indexer.dim()];
        for &[a, b, c] in &triangles {
            neighbors[a].push((b, c));
            neighbors[b].push((a, c));
            neighbors[c].push((a, b));
        }
        Ok(Body {
            indexer,
            low,
            high,
            triangles,
            neighbors,
        })
    }

    pub fn indexer(&self) -> PairIndexer {
        self.indexer
    }

    pub fn dim(&self) -> usize {
        self.indexer.dim()
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        is_metric_fast(x, &self.triangles, self.low, self.high, tol)
    }

    /// Feasible `t`-interval of `x + t·u`. Slightly negative slacks (points a
    /// rounding error outside a facet) are treated as zero.
    pub(crate) fn chord_unchecked(&self, x: &[f64], u: &[f64]) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut bound = |slack: f64, rate: f64| {
            let slack = slack.max(0.0);
            if rate > 0.0 {
                hi = hi.min(slack / rate);
            } else if rate < 0.0 {
                lo = lo.max(slack / rate);
            }
        };
        for (&xi, &ui) in x.iter().zip(u) {
            bound(self.high - xi, ui);
            bound(xi - self.low, -ui);
        }
        for &[a, b, c] in &self.triangles {
            let (xa, xb, xc) = (x[a], x[b], x[c]);
            let (ua, ub, uc) = (u[a], u[b], u[c]);
            bound(xb + xc - xa, ua - ub - uc);
            bound(xa + xc - xb, ub - ua - uc);
            bound(xa + xb - xc, uc - ua - ub);
        }
        (lo.min(0.0), hi.max(0.0))
    }

    /// Feasible range of coordinate `e` with all others held fixed.
    pub(crate) fn coordinate_range(&self, x: &[f64], e: usize) -> (f64, f64) {
        let mut lo = self.low;
        let mut hi = self.high;
        for &(p, q) in &self.neighbors[e] {
            let (xp, xq) = (x[p], x[q]);
            lo = lo.max((xp - xq).abs());
            hi = hi.min(xp + xq);
        }
        (lo, hi.max(lo))
    }
}

/// The maximal interval `[t_lo, t_hi]` with `d + t·u` inside the body.
pub fn chord(d: &MetricVector, u: &[f64], body: &Body) -> Result<(f64, f64)> {
    if d.indexer() != body.indexer {
        return Err(Error::arg("point and body have different sizes"));
    }
    if u.len() != body.dim() {
        return Err(Error::arg(format!(
            "direction has length {}, expected {}",
            u.len(),
            body.dim()
        )));
    }
    if u.iter().any(|x| !x.is_finite()) || u.iter().all(|&x| x == 0.0) {
        return Err(Error::arg("direction must be finite and nonzero"));
    }
    if !body.contains(d.values(), 1e-9) {
        return Err(Error::State("chord requested from a point outside the body".into()));
    }
    Ok(body.chord_unchecked(d.values(), u))
}
