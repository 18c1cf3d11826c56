//! Exact rational volumes of the metric polytope and its clipped pieces.
//!
//! `M_n` is kept in H-representation (triangle inequalities plus the box
//! `[0,2]^dim`), its vertices are enumerated by double description, and the
//! volume is computed by recursive facet decomposition. Everything is exact.

mod dd;
pub mod linalg;
mod volume;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::PairIndexer;

pub use linalg::Q;

/// Largest `n` handled without the long-running opt-in.
pub const EXACT_LIMIT: usize = 4;
/// Largest `n` accepted at all.
pub const EXACT_LIMIT_LONG: usize = 5;

pub fn rational(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Exact conversion of a finite `f64`.
pub fn from_f64(x: f64) -> Result<Q> {
    BigRational::from_float(x).ok_or_else(|| Error::arg(format!("{x} is not finite")))
}

/// Formats as `p/q` with `q >= 1`, e.g. `4/1`.
pub fn format_rational(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(parse(p)?, q))
        }
        None => match parse(s) {
            Ok(p) => Ok(Q::from_integer(p)),
            Err(_) => {
                let x: f64 = s
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))?;
                from_f64(x)
            }
        },
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back on logs when numerator or denominator overflow.
        let ln = |b: &BigInt| {
            let bits = b.bits();
            let shift = bits.saturating_sub(64);
            (b >> shift).to_f64().unwrap().abs().ln() + shift as f64 * std::f64::consts::LN_2
        };
        let mag = (ln(x.numer()) - ln(x.denom())).exp();
        if x.is_negative() {
            -mag
        } else {
            mag
        }
    })
}

/// `{x : <normal, x> <= offset}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalHalfspace {
    normal: Vec<Q>,
    offset: Q,
}

impl RationalHalfspace {
    pub fn new(normal: Vec<Q>, offset: Q) -> Result<Self> {
        if normal.iter().all(Zero::is_zero) {
            return Err(Error::arg("halfspace normal is the zero vector"));
        }
        Ok(RationalHalfspace { normal, offset })
    }

    /// `x_coord <= bound`.
    pub fn upper(dim: usize, coord: usize, bound: Q) -> Result<Self> {
        Self::axis(dim, coord, bound, false)
    }

    /// `x_coord >= bound`.
    pub fn lower(dim: usize, coord: usize, bound: Q) -> Result<Self> {
        Self::axis(dim, coord, bound, true)
    }

    fn axis(dim: usize, coord: usize, bound: Q, flip: bool) -> Result<Self> {
        if coord >= dim {
            return Err(Error::arg(format!("coordinate {coord} out of range 0..{dim}")));
        }
        let mut normal = vec![Q::zero(); dim];
        normal[coord] = integer(if flip { -1 } else { 1 });
        Self::new(normal, if flip { -bound } else { bound })
    }

    pub fn normal(&self) -> &[Q] {
        &self.normal
    }

    pub fn offset(&self) -> &Q {
        &self.offset
    }

    /// `offset - <normal, x>`; nonnegative iff `x` satisfies the halfspace.
    pub fn slack(&self, x: &[Q]) -> Q {
        &self.offset - linalg::dot(&self.normal, x)
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        !self.slack(x).is_negative()
    }
}

impl fmt::Display for RationalHalfspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.normal.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag == integer(1) {
                write!(f, "{sign}x{i}")?;
            } else {
                write!(f, "{sign}{mag}*x{i}")?;
            }
            first = false;
        }
        write!(f, "<={}", self.offset)
    }
}

/// Triangle and box halfspaces of `M_n ∩ [low, high]^dim`.
///
/// Triangles come first: for each `{i<j<k}` one halfspace per choice of the
/// long edge, in the order `ij`, `ik`, `jk`. Then, per coordinate, the lower
/// and the upper box bound.
pub fn build_halfspaces(n: usize, low: &Q, high: &Q) -> Result<Vec<RationalHalfspace>> {
    let idx = PairIndexer::new(n)?;
    if low >= high {
        return Err(Error::arg(format!("empty box [{low}, {high}]")));
    }
    let dim = idx.dim();
    let mut out = Vec::with_capacity(3 * n * (n - 1) * (n - 2) / 6 + 2 * dim);
    for tri in idx.triangles() {
        for long in 0..3 {
            let mut normal = vec![Q::zero(); dim];
            for (pos, &e) in tri.iter().enumerate() {
                normal[e] = integer(if pos == long { 1 } else { -1 });
            }
            out.push(RationalHalfspace::new(normal, Q::zero())?);
        }
    }
    for c in 0..dim {
        out.push(RationalHalfspace::lower(dim, c, low.clone())?);
        out.push(RationalHalfspace::upper(dim, c, high.clone())?);
    }
    Ok(out)
}

/// Exact membership in the closure of `M_n` (no tolerance).
pub fn is_metric_exact(n: usize, values: &[Q]) -> Result<bool> {
    let idx = PairIndexer::new(n)?;
    if values.len() != idx.dim() {
        return Err(Error::arg(format!(
            "expected {} distances, got {}",
            idx.dim(),
            values.len()
        )));
    }
    let two = integer(2);
    if values.iter().any(|v| v.is_negative() || *v > two) {
        return Ok(false);
    }
    Ok(idx.triangles().iter().all(|&[a, b, c]| {
        let (x, y, z) = (&values[a], &values[b], &values[c]);
        *x <= y + z && *y <= x + z && *z <= x + y
    }))
}

/// A bounded polytope in H-representation with its vertex set.
#[derive(Clone, Debug)]
pub struct RationalPolytope {
    dim: usize,
    halfspaces: Vec<RationalHalfspace>,
    vertices: Option<Vec<Vec<Q>>>,
    interior_point: Vec<Q>,
    n: Option<usize>,
    clips: Vec<String>,
    degenerate: bool,
}

impl RationalPolytope {
    /// Builds from halfspaces and enumerates vertices. Lower-dimensional or
    /// empty intersections are flagged degenerate rather than rejected.
    pub fn from_halfspaces(
        dim: usize,
        halfspaces: Vec<RationalHalfspace>,
        interior_point: Vec<Q>,
    ) -> Result<Self> {
        if halfspaces.iter().any(|h| h.normal.len() != dim) || interior_point.len() != dim {
            return Err(Error::arg("halfspace or interior point has the wrong dimension"));
        }
        let mut poly = RationalPolytope {
            dim,
            halfspaces,
            vertices: None,
            interior_point,
            n: None,
            clips: Vec::new(),
            degenerate: false,
        };
        poly.refresh()?;
        Ok(poly)
    }

    /// `M_n ∩ [0, 2]^dim` with interior point `(3/2, …, 3/2)`.
    pub fn metric(n: usize) -> Result<Self> {
        Self::metric_in_box(n, &integer(0), &integer(2))
    }

    pub fn metric_in_box(n: usize, low: &Q, high: &Q) -> Result<Self> {
        let hs = build_halfspaces(n, low, high)?;
        let dim = n * (n - 1) / 2;
        let mut poly = Self::from_halfspaces(dim, hs, vec![rational(3, 2); dim])?;
        poly.n = Some(n);
        if *low != integer(0) || *high != integer(2) {
            poly.clips.push(format!("box[{low},{high}]"));
        }
        Ok(poly)
    }

    fn refresh(&mut self) -> Result<()> {
        let raw = self.raw_halfspaces();
        let verts = dd::enumerate(self.dim, &raw)?;
        let full = linalg::affine_dim(verts.iter().map(Vec::as_slice)) == Some(self.dim);
        self.degenerate = !full;
        if full && !self.halfspaces.iter().all(|h| h.slack(&self.interior_point).is_positive()) {
            self.interior_point = centroid(&verts, self.dim);
        }
        self.vertices = Some(verts);
        Ok(())
    }

    fn raw_halfspaces(&self) -> Vec<(Vec<Q>, Q)> {
        self.halfspaces
            .iter()
            .map(|h| (h.normal.clone(), h.offset.clone()))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[RationalHalfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vec<Q>] {
        self.vertices.as_deref().unwrap_or(&[])
    }

    pub fn interior_point(&self) -> &[Q] {
        &self.interior_point
    }

    /// True when the polytope is empty or has empty interior.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn clips(&self) -> &[String] {
        &self.clips
    }

    pub fn points(&self) -> Option<usize> {
        self.n
    }
}

fn centroid(verts: &[Vec<Q>], dim: usize) -> Vec<Q> {
    let count = integer(verts.len() as i64);
    (0..dim)
        .map(|c| verts.iter().fold(Q::zero(), |acc, v| acc + &v[c]) / &count)
        .collect()
}

/// The complete vertex set of a bounded, full-dimensional polytope.
pub fn enumerate_vertices(poly: &RationalPolytope) -> Result<Vec<Vec<Q>>> {
    let verts = dd::enumerate(poly.dim, &poly.raw_halfspaces())?;
    if linalg::affine_dim(verts.iter().map(Vec::as_slice)) != Some(poly.dim) {
        return Err(Error::Degenerate(format!(
            "{} vertices do not span {} dimensions",
            verts.len(),
            poly.dim
        )));
    }
    Ok(verts)
}

/// Intersection with one more halfspace. Already-satisfied halfspaces leave
/// the vertex set untouched.
pub fn clip(poly: &RationalPolytope, h: RationalHalfspace) -> Result<RationalPolytope> {
    if h.normal.len() != poly.dim {
        return Err(Error::arg("clip halfspace has the wrong dimension"));
    }
    let mut out = poly.clone();
    out.clips.push(h.to_string());
    let redundant = poly.vertices.as_ref().is_some_and(|vs| vs.iter().all(|v| h.contains(v)));
    out.halfspaces.push(h);
    if !redundant {
        out.refresh()?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactVolume {
    #[serde(serialize_with = "serialize_rational")]
    pub value: Q,
    pub n: Option<usize>,
    pub clip_description: String,
}

pub(crate) fn serialize_rational<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

pub fn exact_volume(poly: &RationalPolytope) -> ExactVolume {
    let value = if poly.degenerate {
        Q::zero()
    } else {
        let raw = poly.raw_halfspaces();
        let verts = poly.vertices();
        volume::VolumeEngine::new(&raw, verts).volume(&raw, &poly.interior_point)
    };
    ExactVolume {
        value,
        n: poly.n,
        clip_description: poly.clips.join(";"),
    }
}

/// `Vol(M_n)` exactly. `n` up to [`EXACT_LIMIT`], or [`EXACT_LIMIT_LONG`]
/// with `long_running`.
pub fn metric_volume(n: usize, long_running: bool) -> Result<Q> {
    check_exact_limit(n, long_running)?;
    Ok(exact_volume(&RationalPolytope::metric(n)?).value)
}

pub fn check_exact_limit(n: usize, long_running: bool) -> Result<()> {
    let limit = if long_running { EXACT_LIMIT_LONG } else { EXACT_LIMIT };
    if n > limit {
        return Err(Error::Capability(format!(
            "exact volume is limited to n <= {limit}{}; use the Monte Carlo volume estimator for n = {n}",
            if long_running { "" } else { " (n = 5 needs the long-running opt-in)" }
        )));
    }
    Ok(())
}

/// `Vol(M_n)^(1/C(n,2))`.
pub fn radius(n: usize, long_running: bool) -> Result<f64> {
    let vol = metric_volume(n, long_running)?;
    Ok(radius_of(&vol, n))
}

pub fn radius_of(vol: &Q, n: usize) -> f64 {
    let dim = (n * (n - 1) / 2) as f64;
    let ln = |b: &BigInt| {
        let bits = b.bits();
        let shift = bits.saturating_sub(60);
        (b >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    };
    ((ln(vol.numer()) - ln(vol.denom())) / dim).exp()
}
