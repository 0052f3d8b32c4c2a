//! Built-in perfect forms: the root lattices `A2, A3, A4, D4` and the dual
//! lattice `E7*`. Only Gram matrices are stored; minimal vectors are always
//! computed.

use num_bigint::BigInt;

use crate::cone::RayCone;
use crate::error::{Error, Result};
use crate::exactlinalg::{IntMatrix, Rat};
use crate::forms::{RatForm, SymForm, VectorConfig};
use crate::minvec::shortest_vectors;
use crate::realize::perfect_domain;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub gram: RatForm,
}

impl Domain {
    pub fn new(name: impl Into<String>, gram: RatForm) -> Self {
        Self {
            name: name.into(),
            gram,
        }
    }

    pub fn g(&self) -> usize {
        self.gram.g()
    }

    pub fn minimal_vectors(&self) -> Result<VectorConfig> {
        Ok(shortest_vectors(&self.gram)?.pairs)
    }

    /// The perfect cone; fails when the form is not perfect.
    pub fn cone(&self) -> Result<RayCone> {
        perfect_domain(&self.gram)
    }
}

/// `A_n` as `I + J`: 2 on the diagonal, 1 elsewhere.
pub fn a_n_gram(n: usize) -> RatForm {
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Rat::from_integer(if i == j { 2 } else { 1 }.into()))
                .collect()
        })
        .collect();
    RatForm::from_rows(rows).expect("symmetric by construction")
}

pub fn d4_gram() -> RatForm {
    SymForm::from_i64_rows(&[
        &[2, -1, 0, 0],
        &[-1, 2, -1, -1],
        &[0, -1, 2, 0],
        &[0, -1, 0, 2],
    ])
    .expect("symmetric")
    .to_rational()
}

/// Cartan matrix of `E7`: chain 1-3-4-5-6-7 with node 2 attached to 4.
pub fn e7_cartan() -> IntMatrix {
    let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 3)];
    let mut m = IntMatrix::diagonal(&vec![BigInt::from(2); 7]);
    for (i, j) in edges {
        m[(i, j)] = BigInt::from(-1);
        m[(j, i)] = BigInt::from(-1);
    }
    m
}

/// Gram matrix of `E7*` in the basis of fundamental weights: the inverse
/// of the Cartan matrix.
pub fn e7_dual_gram() -> RatForm {
    let c = e7_cartan();
    let det = c.det().expect("square");
    let adj = c.adjugate().expect("square");
    let entries = (0..7)
        .flat_map(|i| (0..7).map(move |j| (i, j)))
        .map(|(i, j)| Rat::new(adj[(i, j)].clone(), det.clone()))
        .collect();
    RatForm::new(7, entries).expect("inverse of a symmetric matrix")
}

pub fn by_name(name: &str) -> Option<Domain> {
    let gram = match name.to_ascii_uppercase().as_str() {
        "A2" => a_n_gram(2),
        "A3" => a_n_gram(3),
        "A4" => a_n_gram(4),
        "D4" => d4_gram(),
        "E7*" | "E7DUAL" => e7_dual_gram(),
        _ => return None,
    };
    let canonical = if name.eq_ignore_ascii_case("e7dual") {
        "E7*".to_string()
    } else {
        name.to_ascii_uppercase()
    };
    Some(Domain::new(canonical, gram))
}

/// Perfect domains used for face classification in dimension `g`.
/// `E7*` is only included on request.
pub fn builtin_domains(g: usize, include_e7: bool) -> Result<Vec<Domain>> {
    let names: &[&str] = match g {
        2 => &["A2"],
        3 => &["A3"],
        4 => &["A4", "D4"],
        7 if include_e7 => &["E7*"],
        _ => return Err(Error::NoBuiltinDomains(g)),
    };
    Ok(names
        .iter()
        .map(|n| by_name(n).expect("known name"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_lattice_cones() {
        let expect = [("A2", 3, 3), ("A3", 6, 6), ("A4", 10, 10), ("D4", 12, 10)];
        for (name, rays, dim) in expect {
            let cone = by_name(name).unwrap().cone().unwrap();
            assert_eq!((cone.len(), cone.dimension()), (rays, dim), "{name}");
        }
    }

    #[test]
    fn e7_dual_minimum() {
        let q = e7_dual_gram();
        let res = shortest_vectors(&q).unwrap();
        assert_eq!(res.minimum, Rat::new(3.into(), 2.into()));
        assert_eq!(res.pairs.len(), 28);
        assert_eq!(e7_cartan().det().unwrap(), BigInt::from(2));
    }

    #[test]
    fn e7_dual_cone_is_simplicial_with_index_384() {
        let cone = by_name("E7*").unwrap().cone().unwrap();
        assert_eq!(cone.dimension(), 28);
        assert!(cone.is_simplicial());
        assert!(!cone.is_basic());
        assert_eq!(cone.sublattice_index(), BigInt::from(384));
    }

    #[test]
    fn builtin_lists() {
        assert_eq!(builtin_domains(4, false).unwrap().len(), 2);
        assert_eq!(builtin_domains(7, false), Err(Error::NoBuiltinDomains(7)));
        assert_eq!(builtin_domains(7, true).unwrap()[0].name, "E7*");
        assert!(by_name("b5").is_none());
        assert_eq!(by_name("e7dual").unwrap().name, "E7*");
    }
}
