//! Exact rational linear programming.
//!
//! Dense two-phase simplex over `BigRational` with Bland's rule. Variables
//! are free; sign restrictions are expressed as ordinary constraints.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

/// `equalities`: `a . x = b`; `inequalities`: `a . x >= b`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalLP {
    pub variables: usize,
    pub equalities: Vec<LinearConstraint>,
    pub inequalities: Vec<LinearConstraint>,
    pub objective: Vec<Rat>,
    pub sense: Sense,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible)
    }
}

impl RationalLP {
    pub fn new(variables: usize, sense: Sense) -> Self {
        Self {
            variables,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            objective: vec![Rat::zero(); variables],
            sense,
        }
    }

    pub fn with_objective(mut self, objective: Vec<Rat>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add_eq(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.equalities.push(LinearConstraint { coeffs, rhs });
    }

    pub fn add_ge(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.inequalities.push(LinearConstraint { coeffs, rhs });
    }

    pub fn add_le(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.inequalities.push(LinearConstraint {
            coeffs: coeffs.into_iter().map(|c| -c).collect(),
            rhs: -rhs,
        });
    }

    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.variables {
            return Err(Error::ShapeMismatch {
                expected: self.variables,
                got: self.objective.len(),
            });
        }
        for c in self.equalities.iter().chain(&self.inequalities) {
            if c.coeffs.len() != self.variables {
                return Err(Error::ShapeMismatch {
                    expected: self.variables,
                    got: c.coeffs.len(),
                });
            }
        }
        Ok(())
    }

    /// True when `point` satisfies every constraint exactly.
    pub fn is_feasible(&self, point: &[Rat]) -> bool {
        let dot =
            |c: &LinearConstraint| -> Rat { c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum() };
        point.len() == self.variables
            && self.equalities.iter().all(|c| dot(c) == c.rhs)
            && self.inequalities.iter().all(|c| dot(c) >= c.rhs)
    }

    pub fn objective_value(&self, point: &[Rat]) -> Rat {
        self.objective.iter().zip(point).map(|(a, x)| a * x).sum()
    }
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    /// reduced costs; the last entry holds minus the objective value
    cost: Vec<Rat>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x /= &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Rat>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.basis[r] = c;
    }

    /// Bland's rule simplex restricted to columns `< allowed`.
    /// Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let rhs = self.width();
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Solves the program exactly.
pub fn solve_lp(lp: &RationalLP) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.variables;
    let n_eq = lp.equalities.len();
    let n_ge = lp.inequalities.len();
    let m = n_eq + n_ge;
    // columns: x+ (n), x- (n), surplus (n_ge), artificial (m), rhs
    let real = 2 * n + n_ge;
    let width = real + m;
    let mut rows = Vec::with_capacity(m);
    for (k, c) in lp.equalities.iter().chain(&lp.inequalities).enumerate() {
        let mut row = vec![Rat::zero(); width + 1];
        for (j, a) in c.coeffs.iter().enumerate() {
            row[j] = a.clone();
            row[n + j] = -a;
        }
        if k >= n_eq {
            row[2 * n + (k - n_eq)] = -Rat::from_integer(1.into());
        }
        row[width] = c.rhs.clone();
        if row[width].is_negative() {
            for x in row.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        row[real + k] = Rat::from_integer(1.into());
        rows.push(row);
    }
    // phase 1: minimize the sum of artificials
    let mut cost = vec![Rat::zero(); width + 1];
    for row in &rows {
        for (c, x) in cost.iter_mut().zip(row) {
            if !x.is_zero() {
                *c -= x;
            }
        }
    }
    for c in cost.iter_mut().skip(real).take(m) {
        *c = Rat::zero();
    }
    let mut tab = Tableau {
        rows,
        cost,
        basis: (real..real + m).collect(),
    };
    tab.optimize(real);
    if !tab.cost[width].is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    // drive remaining artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= real {
            match (0..real).find(|&j| !tab.rows[r][j].is_zero()) {
                Some(j) => {
                    tab.pivot(r, j);
                    r += 1;
                }
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }
    // phase 2 on the real columns; artificial columns are frozen
    let sign = match lp.sense {
        Sense::Minimize => Rat::from_integer(1.into()),
        Sense::Maximize => Rat::from_integer((-1).into()),
    };
    let mut cost = vec![Rat::zero(); width + 1];
    for j in 0..n {
        cost[j] = &sign * &lp.objective[j];
        cost[n + j] = -&cost[j];
    }
    for (i, &b) in tab.basis.iter().enumerate() {
        let f = cost[b].clone();
        if f.is_zero() {
            continue;
        }
        for (c, x) in cost.iter_mut().zip(&tab.rows[i]) {
            if !x.is_zero() {
                *c -= &f * x;
            }
        }
    }
    tab.cost = cost;
    if !tab.optimize(real) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut split = vec![Rat::zero(); real];
    for (i, &b) in tab.basis.iter().enumerate() {
        split[b] = tab.rows[i][width].clone();
    }
    let point: Vec<Rat> = (0..n).map(|j| &split[j] - &split[n + j]).collect();
    let value = lp.objective_value(&point);
    debug_assert!(lp.is_feasible(&point));
    Ok(LpOutcome::Optimal { value, point })
}
