//! Exact integer and rational linear algebra.

mod lp;
mod matrix;
mod snf;

pub use lp::{solve_lp, LinearConstraint, LpOutcome, Rat, RationalLP, Sense};
pub use matrix::{Combinations, IntMatrix};
pub use snf::{smith_normal_form, SnfResult};

use num_bigint::BigInt;

use crate::error::Result;

/// Rank over the rationals.
pub fn rank_rational(a: &IntMatrix) -> usize {
    a.rank()
}

pub fn adjugate(a: &IntMatrix) -> Result<IntMatrix> {
    a.adjugate()
}

/// Gcd of the maximal minors; errors when the rows are dependent.
pub fn maximal_minor_gcd(a: &IntMatrix) -> Result<BigInt> {
    a.maximal_minor_gcd()
}

/// Clears denominators and divides out the content, giving a primitive
/// integer vector on the same ray (zero stays zero).
pub fn primitive_integer_multiple(v: &[Rat]) -> Vec<BigInt> {
    use num_integer::Integer;
    use num_traits::{One, Zero};
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return scaled;
    }
    scaled.into_iter().map(|x| x / &g).collect()
}
