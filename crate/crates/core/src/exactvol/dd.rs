//! Incremental double-description vertex enumeration.
//!
//! The polytope `{x : Ax <= b}` is homogenized to the cone
//! `{(x, t) : Ax - bt <= 0, t >= 0}`. Its extreme rays with `t > 0` are the
//! vertices; an extreme ray with `t = 0` is a recession direction. Rays are
//! kept as primitive integer vectors so no rational growth accumulates across
//! insertions.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::linalg::{dot_int, kernel_vector, make_primitive, primitive_integer, rank, Q};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct BitSet(Vec<u64>);

impl BitSet {
    pub fn new(bits: usize) -> Self {
        BitSet(vec![0; bits.div_ceil(64)])
    }

    pub fn full(bits: usize) -> Self {
        let mut s = Self::new(bits);
        for i in 0..bits {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn is_superset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

struct Ray {
    v: Vec<BigInt>,
    zeros: BitSet,
}

/// Vertices of `{x : <a_i, x> <= b_i}`, sorted and duplicate-free. An empty
/// result means the polytope is empty.
pub(crate) fn enumerate(dim: usize, halfspaces: &[(Vec<Q>, Q)]) -> Result<Vec<Vec<Q>>> {
    let width = dim + 1;
    let mut rows_q: Vec<Vec<Q>> = halfspaces
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(-b.clone());
            r
        })
        .collect();
    let mut t_row = vec![Q::zero(); width];
    t_row[dim] = -Q::from_integer(1.into());
    rows_q.push(t_row);
    let rows: Vec<Vec<BigInt>> = rows_q.iter().map(|r| primitive_integer(r)).collect();
    let nrows = rows.len();

    // Greedy choice of `width` independent rows seeds a simplicial cone.
    let mut basis: Vec<usize> = Vec::with_capacity(width);
    for i in 0..nrows {
        if rows[i].iter().all(Zero::is_zero) {
            continue;
        }
        let mut trial: Vec<Vec<Q>> = basis.iter().map(|&j| rows_q[j].clone()).collect();
        trial.push(rows_q[i].clone());
        if rank(trial) > basis.len() {
            basis.push(i);
            if basis.len() == width {
                break;
            }
        }
    }
    if basis.len() < width {
        // The cone has a lineality space: some line lies in every constraint.
        return Err(Error::Unbounded);
    }

    let mut rays: Vec<Ray> = Vec::with_capacity(width);
    for (k, &rk) in basis.iter().enumerate() {
        let others: Vec<Vec<Q>> = basis
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &rj)| rows_q[rj].clone())
            .collect();
        let kv = kernel_vector(&others, width).expect("basis rows are independent");
        let mut v = primitive_integer(&kv);
        if dot_int(&rows[rk], &v).is_positive() {
            v.iter_mut().for_each(|x| *x = -x.clone());
        }
        let mut zeros = BitSet::new(nrows);
        for (j, &rj) in basis.iter().enumerate() {
            if j != k {
                zeros.insert(rj);
            }
        }
        rays.push(Ray { v, zeros });
    }

    let in_basis = {
        let mut s = BitSet::new(nrows);
        basis.iter().for_each(|&i| s.insert(i));
        s
    };
    for h in (0..nrows).filter(|&i| !in_basis.contains(i)) {
        let row = &rows[h];
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        let signs: Vec<BigInt> = rays.iter().map(|r| dot_int(row, &r.v)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| signs[i].is_positive()).collect();
        if plus.is_empty() {
            for (r, s) in rays.iter_mut().zip(&signs) {
                if s.is_zero() {
                    r.zeros.insert(h);
                }
            }
            continue;
        }
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| signs[i].is_negative()).collect();

        let mut fresh = Vec::new();
        for &p in &plus {
            for &m in &minus {
                let common = rays[p].zeros.and(&rays[m].zeros);
                if common.len() + 1 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == m || !r.zeros.is_superset(&common));
                if !adjacent {
                    continue;
                }
                let v: Vec<BigInt> = rays[m]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(xm, xp)| &signs[p] * xm - &signs[m] * xp)
                    .collect();
                let mut zeros = common;
                zeros.insert(h);
                fresh.push(Ray {
                    v: make_primitive(v),
                    zeros,
                });
            }
        }

        let mut next = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if signs[i].is_positive() {
                continue;
            }
            if signs[i].is_zero() {
                r.zeros.insert(h);
            }
            next.push(r);
        }
        next.extend(fresh);
        rays = next;
    }

    let mut vertices = Vec::with_capacity(rays.len());
    for r in rays {
        let t = &r.v[dim];
        if t.is_zero() {
            return Err(Error::Unbounded);
        }
        let t = Q::from_integer(t.clone());
        vertices.push(
            r.v[..dim]
                .iter()
                .map(|x| Q::from_integer(x.clone()) / &t)
                .collect::<Vec<_>>(),
        );
    }
    vertices.sort();
    vertices.dedup();
    Ok(vertices)
}
