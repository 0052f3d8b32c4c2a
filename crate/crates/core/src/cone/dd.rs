//! Double description for pointed cones given by generators.
//!
//! The facets of `cone(r_1, ..., r_m) ⊂ Q^d` are the extreme rays of the
//! dual cone `{f : f . r_i >= 0}`. Constraints are inserted one at a time;
//! new rays are built from adjacent positive/negative pairs, with adjacency
//! decided combinatorially from zero sets.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::exactlinalg::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    pub fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for i in 0..n {
            b.insert(i);
        }
        b
    }

    pub fn from_indices(n: usize, idx: &[usize]) -> Self {
        let mut b = Self::empty(n);
        for &i in idx {
            b.insert(i);
        }
        b
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, &w) in self.0.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let t = w.trailing_zeros() as usize;
                out.push(k * 64 + t);
                w &= w - 1;
            }
        }
        out
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

struct Ray {
    f: Vec<BigInt>,
    zeros: Bits,
}

/// Integer normals of the facets of the cone generated by `gens`, which must
/// span `Q^dim`. Output is sorted.
pub(crate) fn facet_normals(gens: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let m = gens.len();
    // greedy choice of dim independent generators
    let mut chosen: Vec<usize> = Vec::with_capacity(dim);
    for i in 0..m {
        let mut rows: Vec<Vec<BigInt>> = chosen.iter().map(|&k| gens[k].clone()).collect();
        rows.push(gens[i].clone());
        let mat = IntMatrix::from_rows(rows).expect("nonempty rows");
        if mat.rank() == chosen.len() + 1 {
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    assert_eq!(chosen.len(), dim, "generators must span");
    let basis = IntMatrix::from_rows(chosen.iter().map(|&k| gens[k].clone()).collect())
        .expect("square basis");
    let det = basis.det().expect("square");
    let adj = basis.adjugate().expect("square");
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let mut f = adj.column(j);
            if det.is_negative() {
                f = f.into_iter().map(|x| -x).collect();
            }
            let f = normalize(f);
            let mut zeros = Bits::empty(m);
            for (k, &c) in chosen.iter().enumerate() {
                if k != j {
                    zeros.insert(c);
                }
            }
            Ray { f, zeros }
        })
        .collect();
    let mut processed = Bits::from_indices(m, &chosen);
    for i in (0..m).filter(|i| !chosen.contains(i)) {
        let r = &gens[i];
        let vals: Vec<BigInt> = rays.iter().map(|ray| dot(&ray.f, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.and(&rays[n].zeros);
                if dim >= 2 && common.count() + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .filter(|&q| q != p && q != n)
                    .all(|q| !common.is_subset(&rays[q].zeros));
                if !adjacent {
                    continue;
                }
                let f: Vec<BigInt> = rays[n]
                    .f
                    .iter()
                    .zip(&rays[p].f)
                    .map(|(fn_, fp)| &vals[p] * fn_ - &vals[n] * fp)
                    .collect();
                let mut zeros = common;
                zeros.insert(i);
                next.push(Ray {
                    f: normalize(f),
                    zeros,
                });
            }
        }
        let old = std::mem::take(&mut rays);
        for (k, mut ray) in old.into_iter().enumerate() {
            if vals[k].is_zero() {
                ray.zeros.insert(i);
                rays.push(ray);
            } else if vals[k].is_positive() {
                rays.push(ray);
            }
        }
        rays.extend(next);
        processed.insert(i);
    }
    debug_assert_eq!(processed.count(), m);
    let mut out: Vec<Vec<BigInt>> = rays.into_iter().map(|r| r.f).collect();
    out.sort();
    out.dedup();
    out
}
