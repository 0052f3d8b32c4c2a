//! Exact short-vector enumeration for rational positive definite forms.
//!
//! Enumeration follows Fincke–Pohst: an exact `L D L^t` decomposition writes
//! `Q[x] = sum_k d_k (x_k + sum_{j>k} l_jk x_j)^2`, and coordinates are fixed
//! from the last to the first, each confined to the integer interval allowed
//! by the remaining budget. Interval endpoints are found with integer square
//! roots and then checked exactly, so no floating point touches the result.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::forms::{IntVec, RatForm, VectorConfig};

pub type Rat = BigRational;

/// Shortest vectors of a form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinVecResult {
    pub minimum: Rat,
    pub pairs: VectorConfig,
}

/// Exact decomposition `Q = L D L^t` with `L` unit lower triangular.
#[derive(Clone, Debug)]
pub(crate) struct Ldl {
    pub diag: Vec<Rat>,
    /// `lower[i][k]` for `k < i`.
    pub lower: Vec<Vec<Rat>>,
}

/// Either the decomposition of a positive definite form, or a rational
/// vector `x != 0` with `Q[x] <= 0`.
pub(crate) fn decompose(q: &RatForm) -> std::result::Result<Ldl, Vec<Rat>> {
    let g = q.g();
    let mut diag: Vec<Rat> = Vec::with_capacity(g);
    let mut lower = vec![vec![Rat::zero(); g]; g];
    for j in 0..g {
        let mut d = q.get(j, j).clone();
        for k in 0..j {
            d -= &lower[j][k] * &lower[j][k] * &diag[k];
        }
        if !d.is_positive() {
            // solve L^t x = e_j on the leading block; then Q[x] = d
            let mut x = vec![Rat::zero(); g];
            x[j] = Rat::one();
            for k in (0..j).rev() {
                let mut s = Rat::zero();
                for i in k + 1..=j {
                    s += &lower[i][k] * &x[i];
                }
                x[k] = -s;
            }
            return Err(x);
        }
        for i in j + 1..g {
            let mut s = q.get(i, j).clone();
            for k in 0..j {
                s -= &lower[i][k] * &lower[j][k] * &diag[k];
            }
            lower[i][j] = s / &d;
        }
        diag.push(d);
    }
    Ok(Ldl { diag, lower })
}

/// All leading principal minors positive.
pub fn is_positive_definite(q: &RatForm) -> bool {
    decompose(q).is_ok()
}

fn floor_sqrt(r: &Rat) -> BigInt {
    // floor(sqrt(r)) for r >= 0
    let fl = r.floor().to_integer();
    if fl.is_negative() {
        return BigInt::zero();
    }
    fl.sqrt()
}

struct Enumerator<'a> {
    ldl: &'a Ldl,
    bound: Rat,
    x: Vec<BigInt>,
    found: Vec<(IntVec, Rat)>,
}

impl Enumerator<'_> {
    fn center(&self, k: usize) -> Rat {
        let g = self.x.len();
        let mut c = Rat::zero();
        for j in k + 1..g {
            if !self.x[j].is_zero() {
                c -= &self.ldl.lower[j][k] * Rat::from_integer(self.x[j].clone());
            }
        }
        c
    }

    fn descend(&mut self, k: usize, used: Rat, upper_zero: bool) {
        let c = self.center(k);
        let room = (&self.bound - &used) / &self.ldl.diag[k];
        if room.is_negative() {
            return;
        }
        let s = floor_sqrt(&room) + BigInt::one();
        let lo = c.floor().to_integer() - &s;
        let hi = c.ceil().to_integer() + &s;
        let mut xk = if upper_zero && lo.is_negative() {
            BigInt::zero()
        } else {
            lo
        };
        while xk <= hi {
            let diff = Rat::from_integer(xk.clone()) - &c;
            let term = &diff * &diff * &self.ldl.diag[k];
            let total = &used + &term;
            if total <= self.bound {
                self.x[k] = xk.clone();
                if k == 0 {
                    if !(upper_zero && xk.is_zero()) {
                        let v = IntVec(self.x.clone()).sign_canonical();
                        self.found.push((v, total));
                    }
                } else {
                    self.descend(k - 1, total, upper_zero && xk.is_zero());
                }
            }
            xk += 1;
        }
        self.x[k] = BigInt::zero();
    }
}

/// Every `±` pair with `0 < Q[x] <= bound`, with its value, sorted by vector.
pub(crate) fn enumerate_below(ldl: &Ldl, g: usize, bound: &Rat) -> Vec<(IntVec, Rat)> {
    if g == 0 {
        return Vec::new();
    }
    let mut e = Enumerator {
        ldl,
        bound: bound.clone(),
        x: vec![BigInt::zero(); g],
        found: Vec::new(),
    };
    e.descend(g - 1, Rat::zero(), true);
    let mut found = e.found;
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found
}

pub fn shortest_vectors(q: &RatForm) -> Result<MinVecResult> {
    let ldl = decompose(q).map_err(|_| Error::NotPositiveDefinite)?;
    let g = q.g();
    let bound = (0..g).map(|i| q.get(i, i).clone()).min().expect("g >= 1");
    let found = enumerate_below(&ldl, g, &bound);
    let minimum = found
        .iter()
        .map(|(_, val)| val.clone())
        .min()
        .expect("unit vectors lie below the bound");
    let pairs = found
        .into_iter()
        .filter(|(_, val)| *val == minimum)
        .map(|(v, _)| v)
        .collect();
    Ok(MinVecResult {
        minimum,
        pairs: VectorConfig::new(g, pairs)?,
    })
}

/// Primitive pairs with `0 < Q[x] <= bound`.
pub fn vectors_below(q: &RatForm, bound: &Rat) -> Result<VectorConfig> {
    let ldl = decompose(q).map_err(|_| Error::NotPositiveDefinite)?;
    if !bound.is_positive() {
        return Err(Error::Invalid("bound must be positive".into()));
    }
    let found = enumerate_below(&ldl, q.g(), bound);
    VectorConfig::new(
        q.g(),
        found
            .into_iter()
            .map(|(v, _)| v)
            .filter(IntVec::is_primitive)
            .collect(),
    )
}

/// Smallest integer multiple of a rational direction.
pub(crate) fn integral_direction(x: &[Rat]) -> IntVec {
    let lcm = x.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let v: Vec<BigInt> = x.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let c = v.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
    IntVec(v.into_iter().map(|a| a / &c).collect()).sign_canonical()
}
