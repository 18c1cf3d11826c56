//! Small exact linear-algebra kernels over `BigRational` / `BigInt`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

/// Row-reduces `rows` in place and returns the pivot columns.
pub fn row_reduce(rows: &mut [Vec<Q>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut().skip(c) {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..ncols {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    row_reduce(&mut rows).len()
}

/// Dimension of the affine hull of `points` (-1 for an empty set is
/// reported as `None`).
pub fn affine_dim<'a, I>(points: I) -> Option<usize>
where
    I: IntoIterator<Item = &'a [Q]>,
{
    let mut it = points.into_iter();
    let base = it.next()?;
    let diffs: Vec<Vec<Q>> = it
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    if diffs.is_empty() {
        return Some(0);
    }
    Some(rank(diffs))
}

/// A nonzero vector spanning the kernel of `rows`, which must have a
/// one-dimensional kernel.
pub fn kernel_vector(rows: &[Vec<Q>], ncols: usize) -> Option<Vec<Q>> {
    let mut m = rows.to_vec();
    let pivots = row_reduce(&mut m);
    if pivots.len() + 1 != ncols {
        return None;
    }
    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut v = vec![Q::zero(); ncols];
    v[free] = Q::one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[r][free].clone();
    }
    Some(v)
}

/// Clears denominators and divides out the content, keeping the direction.
pub fn primitive_integer(v: &[Q]) -> Vec<BigInt> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    make_primitive(ints)
}

pub fn make_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

pub fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Index of the first entry of largest absolute value.
pub fn argmax_abs(v: &[Q]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}
