//! Exact volume by recursive facet decomposition.
//!
//! For a full-dimensional polytope `P ⊂ R^k` and any anchor `p`,
//! `vol(P) = (1/k) Σ_F h_F · vol_{k-1}(F)` with `h_F` the signed distance from
//! `p` to the hyperplane of facet `F`. Each facet is parametrized by dropping
//! the coordinate where its normal is largest; with that projection,
//! `h_F · vol(F) = (b - <a,p>) · vol_proj(F) / |a_k|`, which stays rational.
//!
//! Faces are identified by their sets of vertices (bitsets into the top-level
//! vertex list). Affine dimension is invariant under the facet projections, so
//! it is computed once per vertex set in the original coordinates.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use super::dd::BitSet;
use super::linalg::{affine_dim, argmax_abs, dot, Q};

/// A halfspace restricted to the current face, in that face's free coordinates.
#[derive(Clone)]
struct LocalHalfspace {
    /// Index into the top-level halfspace list (selects the tight set).
    origin: usize,
    normal: Vec<Q>,
    offset: Q,
}

pub(crate) struct VolumeEngine<'a> {
    vertices: &'a [Vec<Q>],
    tight: Vec<BitSet>,
    dims: HashMap<BitSet, Option<usize>>,
    memo: HashMap<(BitSet, Vec<usize>), Q>,
}

impl<'a> VolumeEngine<'a> {
    pub fn new(halfspaces: &[(Vec<Q>, Q)], vertices: &'a [Vec<Q>]) -> Self {
        let tight = halfspaces
            .iter()
            .map(|(a, b)| {
                let mut s = BitSet::new(vertices.len());
                for (i, v) in vertices.iter().enumerate() {
                    if dot(a, v) == *b {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();
        VolumeEngine {
            vertices,
            tight,
            dims: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn affine_dim(&mut self, set: &BitSet) -> Option<usize> {
        if let Some(d) = self.dims.get(set) {
            return *d;
        }
        let verts = self.vertices;
        let d = affine_dim(set.iter().map(|i| verts[i].as_slice()));
        self.dims.insert(set.clone(), d);
        d
    }

    /// Volume of the full polytope, anchored at `anchor`.
    pub fn volume(&mut self, halfspaces: &[(Vec<Q>, Q)], anchor: &[Q]) -> Q {
        let dim = anchor.len();
        let all = BitSet::full(self.vertices.len());
        if self.affine_dim(&all) != Some(dim) {
            return Q::zero();
        }
        let local: Vec<LocalHalfspace> = halfspaces
            .iter()
            .enumerate()
            .map(|(origin, (a, b))| LocalHalfspace {
                origin,
                normal: a.clone(),
                offset: b.clone(),
            })
            .collect();
        let free: Vec<usize> = (0..dim).collect();
        self.face_volume(&all, &free, &local, Some(anchor))
    }

    fn face_volume(
        &mut self,
        face: &BitSet,
        free: &[usize],
        halfspaces: &[LocalHalfspace],
        anchor: Option<&[Q]>,
    ) -> Q {
        let k = free.len();
        if k == 0 {
            return Q::from_integer(1.into());
        }
        let key = (face.clone(), free.to_vec());
        if anchor.is_none() {
            if let Some(v) = self.memo.get(&key) {
                return v.clone();
            }
        }
        let value = if k == 1 {
            let c = free[0];
            let mut vals = face.iter().map(|i| &self.vertices[i][c]);
            let first = vals.next().expect("a 1-face has vertices").clone();
            let (lo, hi) = vals.fold((first.clone(), first), |(lo, hi), x| {
                (if *x < lo { x.clone() } else { lo }, if *x > hi { x.clone() } else { hi })
            });
            hi - lo
        } else {
            self.decompose(face, free, halfspaces, anchor)
        };
        if anchor.is_none() {
            self.memo.insert(key, value.clone());
        }
        value
    }

    fn decompose(
        &mut self,
        face: &BitSet,
        free: &[usize],
        halfspaces: &[LocalHalfspace],
        anchor: Option<&[Q]>,
    ) -> Q {
        let k = free.len();
        // Facets of this face, one per distinct vertex set.
        let mut facets: Vec<(&LocalHalfspace, BitSet)> = Vec::new();
        for h in halfspaces {
            if h.normal.iter().all(Zero::is_zero) {
                continue;
            }
            let set = face.and(&self.tight[h.origin]);
            if facets.iter().any(|(_, s)| *s == set) {
                continue;
            }
            if self.affine_dim(&set) == Some(k - 1) {
                facets.push((h, set));
            }
        }

        let anchor: Vec<Q> = match anchor {
            Some(p) => p.to_vec(),
            None => {
                let count = Q::from_integer(face.len().into());
                free.iter()
                    .map(|&c| {
                        face.iter()
                            .fold(Q::zero(), |acc, i| acc + &self.vertices[i][c])
                            / &count
                    })
                    .collect()
            }
        };

        let mut total = Q::zero();
        for (idx, (facet, set)) in facets.iter().enumerate() {
            let drop = argmax_abs(&facet.normal);
            let pivot = facet.normal[drop].clone();
            let height = (&facet.offset - dot(&facet.normal, &anchor)) / pivot.abs();
            if height.is_zero() {
                continue;
            }
            let sub_free: Vec<usize> = free
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != drop)
                .map(|(_, &c)| c)
                .collect();
            // Substitute x_drop = (b - Σ_{j≠drop} a_j x_j) / a_drop into the
            // halfspaces that cut a ridge out of this facet.
            let mut sub = Vec::new();
            for (jdx, (other, oset)) in facets.iter().enumerate() {
                if jdx == idx {
                    continue;
                }
                let ridge = set.and(oset);
                if self.affine_dim(&ridge) != Some(k - 2) {
                    continue;
                }
                let f = &other.normal[drop] / &pivot;
                let normal: Vec<Q> = other
                    .normal
                    .iter()
                    .zip(&facet.normal)
                    .enumerate()
                    .filter(|&(j, _)| j != drop)
                    .map(|(_, (c, a))| c - &f * a)
                    .collect();
                let offset = &other.offset - &f * &facet.offset;
                sub.push(LocalHalfspace {
                    origin: other.origin,
                    normal,
                    offset,
                });
            }
            let sub_vol = self.face_volume(set, &sub_free, &sub, None);
            total += height * sub_vol;
        }
        total / Q::from_integer(k.into())
    }
}
