//! Smith normal form with unimodular transformation witnesses.
//!
//! Reduction is fraction-free: at every stage the nonzero entry of smallest
//! absolute value in the trailing submatrix becomes the pivot, its row and
//! column are cleared by Euclidean division, and an entry not divisible by
//! the pivot is folded back into the pivot row until the pivot divides the
//! whole trailing block.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// Nonzero invariant factors `d_1 | d_2 | ... | d_r`, all positive.
    pub divisors: Vec<BigInt>,
    /// Unimodular `P` with `P * A * Q` diagonal.
    pub left_transform: IntMatrix,
    /// Unimodular `Q` with `P * A * Q` diagonal.
    pub right_transform: IntMatrix,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    /// Product of the invariant factors.
    pub fn index(&self) -> BigInt {
        self.divisors.iter().product()
    }

    pub fn all_ones(&self) -> bool {
        self.divisors.iter().all(One::is_one)
    }

    /// The diagonal matrix `P * A * Q`, shaped like `A`.
    pub fn diagonal(&self, rows: usize, cols: usize) -> IntMatrix {
        let mut d = IntMatrix::zeros(rows, cols);
        for (i, x) in self.divisors.iter().enumerate() {
            d[(i, i)] = x.clone();
        }
        d
    }
}

struct Work {
    a: Vec<Vec<BigInt>>,
    left: Vec<Vec<BigInt>>,
    right: Vec<Vec<BigInt>>,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.left.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut().chain(self.right.iter_mut()) {
            row.swap(i, j);
        }
    }

    /// row[target] -= q * row[source]
    fn row_sub(&mut self, target: usize, source: usize, q: &BigInt) {
        for m in [&mut self.a, &mut self.left] {
            let src = m[source].clone();
            for (t, s) in m[target].iter_mut().zip(&src) {
                if !s.is_zero() {
                    *t -= q * s;
                }
            }
        }
    }

    /// col[target] -= q * col[source]
    fn col_sub(&mut self, target: usize, source: usize, q: &BigInt) {
        for m in [&mut self.a, &mut self.right] {
            for row in m.iter_mut() {
                if !row[source].is_zero() {
                    let delta = q * &row[source];
                    row[target] -= delta;
                }
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.left] {
            for x in m[i].iter_mut() {
                *x = -std::mem::take(x);
            }
        }
    }

    fn smallest_nonzero(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in self.a.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                if x.is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => x.abs() < self.a[bi][bj].abs(),
                };
                if better {
                    best = Some((i, j));
                    if x.abs().is_one() {
                        return best;
                    }
                }
            }
        }
        best
    }
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn smith_normal_form(matrix: &IntMatrix) -> SnfResult {
    let (m, n) = (matrix.rows(), matrix.cols());
    let mut w = Work {
        a: matrix.to_rows(),
        left: identity_rows(m),
        right: identity_rows(n),
    };
    let mut divisors = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        let Some((pi, pj)) = w.smallest_nonzero(t) else {
            break;
        };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            let pivot = w.a[t][t].clone();
            let mut leftover = false;
            for i in t + 1..m {
                if !w.a[i][t].is_zero() {
                    let q = w.a[i][t].div_floor(&pivot);
                    w.row_sub(i, t, &q);
                    leftover |= !w.a[i][t].is_zero();
                }
            }
            for j in t + 1..n {
                if !w.a[t][j].is_zero() {
                    let q = w.a[t][j].div_floor(&pivot);
                    w.col_sub(j, t, &q);
                    leftover |= !w.a[t][j].is_zero();
                }
            }
            if leftover {
                // a remainder smaller than the pivot survived; re-pivot
                let (pi, pj) = w.smallest_nonzero(t).expect("nonzero remainder");
                w.swap_rows(t, pi);
                w.swap_cols(t, pj);
                continue;
            }
            let offender =
                (t + 1..m).find(|&i| (t + 1..n).any(|j| !w.a[i][j].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    // row[t] += row[i] brings the offending entry into the pivot row
                    w.row_sub(t, i, &BigInt::from(-1));
                }
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            w.negate_row(t);
        }
        divisors.push(w.a[t][t].clone());
        t += 1;
    }
    SnfResult {
        divisors,
        left_transform: IntMatrix::from_rows(w.left).expect("square transform"),
        right_transform: IntMatrix::from_rows(w.right).expect("square transform"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn check_witness(a: &IntMatrix, snf: &SnfResult) {
        let d = &(&snf.left_transform * a) * &snf.right_transform;
        assert_eq!(d, snf.diagonal(a.rows(), a.cols()));
        assert!(snf.left_transform.det().unwrap().abs().is_one());
        assert!(snf.right_transform.det().unwrap().abs().is_one());
        for pair in snf.divisors.windows(2) {
            assert!(pair[1].is_multiple_of(&pair[0]));
        }
    }

    #[test]
    fn diag_two_three() {
        let a = m(&[&[2, 0], &[0, 3]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.divisors, ints(&[1, 6]));
        check_witness(&a, &snf);
    }

    #[test]
    fn identity_three() {
        let a = IntMatrix::identity(3);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.divisors, ints(&[1, 1, 1]));
        check_witness(&a, &snf);
    }

    #[test]
    fn toy_cone_rows() {
        // coordinates of p((1,1)) and p((1,-1))
        let a = m(&[&[1, 1, 1], &[1, 1, -1]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.divisors, ints(&[1, 2]));
        check_witness(&a, &snf);
    }

    #[test]
    fn rank_deficient_and_negative_entries() {
        let a = m(&[&[6, -4, 2], &[-3, 2, -1], &[4, 0, 8]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.rank(), 2);
        check_witness(&a, &snf);
    }
}
