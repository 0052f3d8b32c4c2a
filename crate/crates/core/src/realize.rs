//! Realizability of vector configurations as minimal-vector sets.
//!
//! A configuration `V` is realizable when some positive definite form `Q`
//! has `Q[v] = 2` for `v ∈ V` and `Q[w] > 2` for every other nonzero integer
//! vector. The search is a cutting-plane loop over a finite set `W` of
//! excluded vectors:
//!
//! ```text
//! maximize λ  s.t.  Q[v] = 2 (v ∈ V),  Q[w] >= 2 + λ (w ∈ W),  λ <= 1,  |q_k| <= B
//! ```
//!
//! The box `B` contains every positive definite form with `Q[v] = 2` on `V`,
//! so an optimum with `λ <= 0` proves that no realizing form exists. Non-PD
//! optima and short vectors of PD optima become new cuts.
//!
//! The configuration is first rewritten in its saturated span; a form there
//! is lifted back as a block sum with `3·I` on a complement.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cone::RayCone;
use crate::error::{Error, Result};
use crate::exactlinalg::{solve_lp, IntMatrix, LpOutcome, Rat, RationalLP, Sense};
use crate::forms::{saturate, sym2_dim, IntVec, RatForm, VectorConfig};
use crate::minvec::{decompose, integral_direction, shortest_vectors, vectors_below};

pub const DEFAULT_ITERATION_CAP: usize = 10_000;

/// Why a configuration is not a minimal-vector set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstruction {
    /// The constraint system has no solution at all.
    Infeasible { cuts: Vec<IntVec> },
    /// Every admissible form has `Q[vector] <= 2`, in the original coordinates.
    ForcedVector { vector: IntVec, cuts: Vec<IntVec> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizabilityVerdict {
    pub realizable: bool,
    /// Form whose minimal vectors are exactly the configuration (minimum 2).
    pub witness: Option<RatForm>,
    pub obstruction: Option<Obstruction>,
    /// Number of linear programs solved.
    pub iterations: usize,
}

impl RealizabilityVerdict {
    fn yes(witness: RatForm, iterations: usize) -> Self {
        Self {
            realizable: true,
            witness: Some(witness),
            obstruction: None,
            iterations,
        }
    }

    fn no(obstruction: Obstruction, iterations: usize) -> Self {
        Self {
            realizable: false,
            witness: None,
            obstruction: Some(obstruction),
            iterations,
        }
    }
}

pub fn is_perfect_cone_config(config: &VectorConfig) -> Result<RealizabilityVerdict> {
    is_perfect_cone_config_with_cap(config, DEFAULT_ITERATION_CAP)
}

/// As [`is_perfect_cone_config`], failing with [`Error::IterationCap`] once
/// more than `cap` cuts have been added.
pub fn is_perfect_cone_config_with_cap(
    config: &VectorConfig,
    cap: usize,
) -> Result<RealizabilityVerdict> {
    let (sat, frame) = saturate(config)?;
    let lift_vec = |y: &IntVec| frame.embed(y);
    let verdict = realize_spanning(&sat, cap)?;
    let g = config.g();
    let d = frame.dim;
    let Some(local) = verdict.witness else {
        let obstruction = match verdict
            .obstruction
            .expect("negative verdicts carry an obstruction")
        {
            Obstruction::Infeasible { cuts } => Obstruction::Infeasible {
                cuts: cuts.iter().map(lift_vec).collect(),
            },
            Obstruction::ForcedVector { vector, cuts } => Obstruction::ForcedVector {
                vector: lift_vec(&vector).sign_canonical(),
                cuts: cuts.iter().map(lift_vec).collect(),
            },
        };
        return Ok(RealizabilityVerdict::no(obstruction, verdict.iterations));
    };
    let mut block = RatForm::zero(g).rows();
    for (i, row) in block.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i < d && j < d {
                *x = local.get(i, j).clone();
            } else if i == j {
                *x = Rat::from_integer(3.into());
            }
        }
    }
    let witness = RatForm::from_rows(block)?.pullback(&frame.inverse)?;
    let check = shortest_vectors(&witness)?;
    if check.minimum != Rat::from_integer(2.into()) || !check.pairs.same_pairs(config) {
        return Err(Error::Invalid(
            "lifted witness failed minimal-vector verification".into(),
        ));
    }
    Ok(RealizabilityVerdict::yes(witness, verdict.iterations))
}

/// Coefficients of `Q[v]` in the `sym2` coordinates of `Q`.
fn value_row(v: &IntVec) -> Vec<Rat> {
    let g = v.len();
    let mut row: Vec<Rat> = (0..g)
        .map(|i| Rat::from_integer(&v.0[i] * &v.0[i]))
        .collect();
    for i in 0..g {
        for j in i + 1..g {
            row.push(Rat::from_integer(BigInt::from(2) * &v.0[i] * &v.0[j]));
        }
    }
    row
}

/// Entry bound for forms taking the value 2 on a spanning configuration.
fn box_bound(config: &VectorConfig) -> Result<BigInt> {
    let d = config.g();
    let mut chosen: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    for v in config.pairs() {
        let mut trial = chosen.clone();
        trial.push(v.0.clone());
        if IntMatrix::from_rows(trial.clone())?.rank() == trial.len() {
            chosen = trial;
        }
        if chosen.len() == d {
            break;
        }
    }
    // columns v_1..v_d; e_j = sum_i c_ij v_i with c = V^{-1}
    let vmat = IntMatrix::from_rows(chosen)?.transpose();
    let det = vmat.det()?;
    let adj = vmat.adjugate()?;
    let mut bound = BigInt::zero();
    for j in 0..d {
        // sqrt(Q[e_j]) <= sum_i |c_ij| sqrt(2)
        let s: BigInt = (0..d).map(|i| adj[(i, j)].abs()).sum();
        let num = BigInt::from(2) * &s * &s;
        let den = &det * &det;
        let q = (&num + &den - BigInt::one()) / &den;
        if q > bound {
            bound = q;
        }
    }
    Ok(bound)
}

fn realize_spanning(config: &VectorConfig, cap: usize) -> Result<RealizabilityVerdict> {
    let d = config.g();
    let n = sym2_dim(d);
    let two = Rat::from_integer(2.into());
    let bound = Rat::from_integer(box_bound(config)?);
    let mut base = RationalLP::new(n + 1, Sense::Maximize);
    base.objective[n] = Rat::one();
    for v in config.pairs() {
        let mut row = value_row(v);
        row.push(Rat::zero());
        base.add_eq(row, two.clone());
    }
    for k in 0..=n {
        let mut e = vec![Rat::zero(); n + 1];
        e[k] = Rat::one();
        if k < n {
            base.add_le(e.clone(), bound.clone());
            base.add_ge(e, -bound.clone());
        } else {
            base.add_le(e, Rat::one());
        }
    }
    let mut cuts: Vec<IntVec> = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mut w = IntVec::unit(d, i);
            if j > i {
                w.0[j] = BigInt::one();
            }
            let mut seeds = vec![w.clone()];
            if j > i {
                w.0[j] = -BigInt::one();
                seeds.push(w);
            }
            for s in seeds {
                let s = s.sign_canonical();
                if !config.contains(&s) {
                    cuts.push(s);
                }
            }
        }
    }
    let mut lp = base;
    for w in &cuts {
        add_cut(&mut lp, w, &two);
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (value, point) = match solve_lp(&lp)? {
            LpOutcome::Infeasible => {
                return Ok(RealizabilityVerdict::no(
                    Obstruction::Infeasible { cuts },
                    iterations,
                ))
            }
            LpOutcome::Unbounded => {
                return Err(Error::Invalid("bounded program reported unbounded".into()))
            }
            LpOutcome::Optimal { value, point } => (value, point),
        };
        let q = RatForm::from_sym2_coords(d, &point[..n])?;
        if !value.is_positive() {
            let vector = cuts
                .iter()
                .find(|w| q.evaluate(w).is_ok_and(|x| x <= two))
                .cloned()
                .expect("a cut is tight at a nonpositive margin");
            return Ok(RealizabilityVerdict::no(
                Obstruction::ForcedVector { vector, cuts },
                iterations,
            ));
        }
        let new_cuts: Vec<IntVec> = match decompose(&q) {
            Err(x) => {
                let margin = &two + &value;
                let small = violated_in_box(&q, config, &margin);
                if small.is_empty() {
                    vec![integral_direction(&x)]
                } else {
                    small
                }
            }
            Ok(_) => vectors_below(&q, &two)?
                .pairs()
                .iter()
                .filter(|w| !config.contains(w))
                .cloned()
                .collect(),
        };
        if new_cuts.is_empty() {
            return Ok(RealizabilityVerdict::yes(q, iterations));
        }
        for w in new_cuts {
            if cuts.contains(&w) {
                return Err(Error::Invalid(format!("cut {w} was not enforced")));
            }
            add_cut(&mut lp, &w, &two);
            cuts.push(w);
        }
        if cuts.len() > cap {
            return Err(Error::IterationCap { cap });
        }
    }
}

/// Up to `2d` non-configuration vectors with `Q[w] < margin`, most violated
/// first, from the smallest coordinate box that contains any.
fn violated_in_box(q: &RatForm, config: &VectorConfig, margin: &Rat) -> Vec<IntVec> {
    const MAX_POINTS: usize = 200_000;
    let d = q.g();
    for radius in 1i64..=4 {
        let side = (2 * radius + 1) as usize;
        let Some(total) = side.checked_pow(d as u32).filter(|&t| t <= MAX_POINTS) else {
            break;
        };
        let mut hits: Vec<(Rat, IntVec)> = Vec::new();
        for code in 0..total {
            let mut c = code;
            let x: Vec<i64> = (0..d)
                .map(|_| {
                    let digit = (c % side) as i64 - radius;
                    c /= side;
                    digit
                })
                .collect();
            let w = IntVec::from_i64(&x);
            if w.is_zero() || !w.is_sign_canonical() || !w.is_primitive() || config.contains(&w) {
                continue;
            }
            let val = q.eval_unchecked(w.as_slice());
            if val < *margin {
                hits.push((val, w));
            }
        }
        if !hits.is_empty() {
            hits.sort();
            return hits.into_iter().take(2 * d).map(|(_, w)| w).collect();
        }
    }
    Vec::new()
}

fn add_cut(lp: &mut RationalLP, w: &IntVec, two: &Rat) {
    let mut row = value_row(w);
    row.push(-Rat::one());
    lp.add_ge(row, two.clone());
}

/// Voronoi's criterion: the rank-1 forms of the minimal vectors span `Sym^2`.
pub fn is_perfect_form(q: &RatForm) -> Result<bool> {
    let res = shortest_vectors(q)?;
    let cone = RayCone::new(res.pairs)?;
    Ok(cone.dimension() == sym2_dim(q.g()))
}

/// The cone spanned by `p(v)` over the minimal vectors of a perfect form.
pub fn perfect_domain(q: &RatForm) -> Result<RayCone> {
    let res = shortest_vectors(q)?;
    let cone = RayCone::new(res.pairs)?;
    let dim = cone.dimension();
    let full = sym2_dim(q.g());
    if dim != full {
        return Err(Error::NotPerfect {
            dimension: dim,
            full,
        });
    }
    Ok(cone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::SymForm;

    fn cfg(g: usize, vs: &[&[i64]]) -> VectorConfig {
        VectorConfig::from_i64(g, vs).unwrap()
    }

    fn form(rows: &[&[i64]]) -> RatForm {
        SymForm::from_i64_rows(rows).unwrap().to_rational()
    }

    fn d4() -> RatForm {
        form(&[
            &[2, -1, 0, 0],
            &[-1, 2, -1, -1],
            &[0, -1, 2, 0],
            &[0, -1, 0, 2],
        ])
    }

    fn assert_realizes(config: &VectorConfig) -> RatForm {
        let v = is_perfect_cone_config(config).unwrap();
        assert!(v.realizable, "{config} should be realizable: {v:?}");
        let w = v.witness.unwrap();
        let res = shortest_vectors(&w).unwrap();
        assert_eq!(res.minimum, Rat::from_integer(2.into()));
        assert!(res.pairs.same_pairs(config));
        w
    }

    #[test]
    fn unit_vectors_are_realizable() {
        assert_realizes(&cfg(2, &[&[1, 0], &[0, 1]]));
    }

    #[test]
    fn toy_pair_is_not_realizable() {
        let v = is_perfect_cone_config(&cfg(2, &[&[1, 1], &[1, -1]])).unwrap();
        assert!(!v.realizable);
        assert!(v.witness.is_none());
        match v.obstruction.unwrap() {
            Obstruction::ForcedVector { vector, .. } => {
                assert!(vector == IntVec::from_i64(&[1, 0]) || vector == IntVec::from_i64(&[0, 1]))
            }
            other => panic!("unexpected obstruction {other:?}"),
        }
    }

    #[test]
    fn d4_round_trip() {
        let pairs = shortest_vectors(&d4()).unwrap().pairs;
        let w = assert_realizes(&pairs);
        // full-dimensional cone: the witness is pinned down by the equalities
        assert_eq!(w, d4());
    }

    #[test]
    fn non_spanning_configs_are_saturated() {
        assert_realizes(&cfg(3, &[&[1, 0, 0]]));
        assert_realizes(&cfg(3, &[&[1, 1, 0], &[0, 1, 1], &[1, 2, 1]]));
        let v = is_perfect_cone_config(&cfg(3, &[&[1, 1, 0], &[1, -1, 0]])).unwrap();
        assert!(!v.realizable);
    }

    #[test]
    fn long_vectors_force_short_ones() {
        // (2,1) with e1: Q[(2,1)] = 2 forces something short in between
        let v = is_perfect_cone_config(&cfg(2, &[&[1, 0], &[0, 1], &[2, 1]])).unwrap();
        assert!(!v.realizable);
    }

    #[test]
    fn three_coplanar_pairs_in_dimension_three() {
        assert_realizes(&cfg(3, &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[0, 0, 1]]));
    }

    #[test]
    fn cap_is_enforced() {
        // a face of the D4 domain that needs cuts beyond the seed set
        let face = cfg(
            4,
            &[&[0, 1, 0, 0], &[0, 1, 1, 0], &[1, 1, 1, 0], &[1, 2, 1, 1]],
        );
        assert_eq!(
            is_perfect_cone_config_with_cap(&face, 0),
            Err(Error::IterationCap { cap: 0 })
        );
        assert!(is_perfect_cone_config(&face).unwrap().realizable);
    }

    #[test]
    fn perfect_form_examples() {
        assert!(is_perfect_form(&form(&[&[2, 1], &[1, 2]])).unwrap());
        assert!(!is_perfect_form(&RatForm::identity(2)).unwrap());
        assert!(is_perfect_form(&d4()).unwrap());
        assert_eq!(
            is_perfect_form(&form(&[&[1, 2], &[2, 1]])),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn perfect_domain_examples() {
        let a2 = perfect_domain(&form(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!((a2.len(), a2.dimension()), (3, 3));
        let a3 = perfect_domain(&form(&[&[2, 1, 1], &[1, 2, 1], &[1, 1, 2]])).unwrap();
        assert_eq!((a3.len(), a3.dimension()), (6, 6));
        let d = perfect_domain(&d4()).unwrap();
        assert_eq!((d.len(), d.dimension()), (12, 10));
        assert!(matches!(
            perfect_domain(&RatForm::identity(2)),
            Err(Error::NotPerfect {
                dimension: 2,
                full: 3
            })
        ));
    }

    #[test]
    fn faces_of_d4_are_realizable() {
        let cone = perfect_domain(&d4()).unwrap();
        let faces = cone.enumerate_faces(1..=9);
        for face in faces.iter().step_by(37) {
            assert_realizes(&face.config(&cone));
        }
    }
}
