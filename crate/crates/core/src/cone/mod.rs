//! Cones `sum_i R+ p(v_i)` spanned by rank-1 forms.

mod dd;

use std::collections::{BTreeSet, HashSet};
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlinalg::{
    primitive_integer_multiple, smith_normal_form, solve_lp, Combinations, IntMatrix, LpOutcome,
    Rat, RationalLP, Sense, SnfResult,
};
use crate::forms::{rank1_coords, sym2_dim, VectorConfig};

pub(crate) use dd::Bits;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RayCone {
    generators: VectorConfig,
}

/// A linear functional on `Sym^2` (in `sym2` coordinates) vanishing exactly
/// on the generators listed in `face`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceCertificate {
    pub functional: Vec<BigInt>,
    pub face: Vec<usize>,
}

impl FaceCertificate {
    /// Zero on the face, strictly positive on every other generator.
    pub fn verify(&self, cone: &RayCone) -> bool {
        let face: HashSet<usize> = self.face.iter().copied().collect();
        if self.functional.len() != sym2_dim(cone.g()) {
            return false;
        }
        cone.generators.pairs().iter().enumerate().all(|(i, v)| {
            let val: BigInt = self
                .functional
                .iter()
                .zip(rank1_coords(v))
                .map(|(a, b)| a * b)
                .sum();
            if face.contains(&i) {
                val.is_zero()
            } else {
                val.is_positive()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    /// Integer functional in `sym2` coordinates, nonnegative on the cone.
    pub normal: Vec<BigInt>,
    /// Generators on which the normal vanishes.
    pub incidence: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualDescription {
    pub extreme_rays: Vec<usize>,
    /// Generators that are positive combinations of others.
    pub redundant: Vec<usize>,
    pub facets: Vec<Facet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Indices of the generators lying on the face, ascending.
    pub generators: Vec<usize>,
    pub dimension: usize,
    pub certificate: FaceCertificate,
}

impl Face {
    pub fn config(&self, parent: &RayCone) -> VectorConfig {
        parent.generators.subset(&self.generators)
    }

    pub fn cone(&self, parent: &RayCone) -> RayCone {
        RayCone {
            generators: self.config(parent),
        }
    }
}

/// Generators projected injectively onto the pivot coordinates of their span.
struct Projection {
    pivots: Vec<usize>,
    rows: Vec<Vec<BigInt>>,
}

impl Projection {
    fn lift(&self, f: &[BigInt], n: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); n];
        for (k, &p) in self.pivots.iter().enumerate() {
            out[p] = f[k].clone();
        }
        out
    }
}

impl RayCone {
    pub fn new(generators: VectorConfig) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyConfig);
        }
        Ok(Self { generators })
    }

    pub fn g(&self) -> usize {
        self.generators.g()
    }

    pub fn generators(&self) -> &VectorConfig {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn coordinate_matrix(&self) -> IntMatrix {
        self.generators
            .coordinate_matrix()
            .expect("cones have at least one generator")
    }

    pub fn dimension(&self) -> usize {
        self.coordinate_matrix().rank()
    }

    pub fn is_simplicial(&self) -> bool {
        self.dimension() == self.len()
    }

    pub fn snf(&self) -> SnfResult {
        smith_normal_form(&self.coordinate_matrix())
    }

    /// Generators extend to a Z-basis of `Sym^2(Z^g)`: independent, with
    /// every Smith divisor equal to 1.
    pub fn is_basic(&self) -> bool {
        let snf = self.snf();
        snf.rank() == self.len() && snf.all_ones()
    }

    /// Index of the generated sublattice in its saturation.
    pub fn sublattice_index(&self) -> BigInt {
        self.snf().index()
    }

    fn projection(&self) -> Projection {
        let m = self.coordinate_matrix();
        let pivots = m.pivot_columns();
        let rows = (0..m.rows())
            .map(|i| pivots.iter().map(|&p| m[(i, p)].clone()).collect())
            .collect();
        Projection { pivots, rows }
    }

    /// Decides by linear programming whether `subset` is exactly the set of
    /// generators on some face; returns a verified certificate if so.
    pub fn is_face(&self, subset: &[usize]) -> Result<Option<FaceCertificate>> {
        let m = self.len();
        if let Some(&bad) = subset.iter().find(|&&i| i >= m) {
            return Err(Error::Invalid(format!(
                "generator index {bad} out of range"
            )));
        }
        let inside: BTreeSet<usize> = subset.iter().copied().collect();
        let n = sym2_dim(self.g());
        let face: Vec<usize> = inside.iter().copied().collect();
        if inside.len() == m {
            return Ok(Some(FaceCertificate {
                functional: vec![BigInt::zero(); n],
                face,
            }));
        }
        let proj = self.projection();
        let d = proj.pivots.len();
        let rat = |x: &BigInt| Rat::from_integer(x.clone());
        let one = Rat::one();
        // variables: f_1..f_d, t; maximize t
        let mut objective = vec![Rat::zero(); d + 1];
        objective[d] = one.clone();
        let mut lp = RationalLP::new(d + 1, Sense::Maximize).with_objective(objective);
        for (i, row) in proj.rows.iter().enumerate() {
            let mut coeffs: Vec<Rat> = row.iter().map(rat).collect();
            if inside.contains(&i) {
                coeffs.push(Rat::zero());
                lp.add_eq(coeffs, Rat::zero());
            } else {
                coeffs.push(-one.clone());
                lp.add_ge(coeffs, Rat::zero());
            }
        }
        for k in 0..=d {
            let mut e = vec![Rat::zero(); d + 1];
            e[k] = one.clone();
            lp.add_le(e.clone(), one.clone());
            if k < d {
                lp.add_ge(e, -one.clone());
            }
        }
        match solve_lp(&lp)? {
            LpOutcome::Optimal { value, point } if value.is_positive() => {
                let f = primitive_integer_multiple(&point[..d]);
                let cert = FaceCertificate {
                    functional: proj.lift(&f, n),
                    face,
                };
                if !cert.verify(self) {
                    return Err(Error::Invalid(
                        "face certificate failed verification".into(),
                    ));
                }
                Ok(Some(cert))
            }
            _ => Ok(None),
        }
    }

    pub fn extreme_rays_and_facets(&self) -> DualDescription {
        let proj = self.projection();
        let d = proj.pivots.len();
        let n = sym2_dim(self.g());
        let normals = dd::facet_normals(&proj.rows, d);
        let facets: Vec<Facet> = normals
            .iter()
            .map(|f| Facet {
                normal: proj.lift(f, n),
                incidence: (0..proj.rows.len())
                    .filter(|&i| dot(f, &proj.rows[i]).is_zero())
                    .collect(),
            })
            .collect();
        let mut extreme_rays = Vec::new();
        let mut redundant = Vec::new();
        for i in 0..self.len() {
            let tight: Vec<Vec<BigInt>> = normals
                .iter()
                .filter(|f| dot(f, &proj.rows[i]).is_zero())
                .cloned()
                .collect();
            let rank = IntMatrix::from_rows(tight).map_or(0, |m| m.rank());
            if rank + 1 == d {
                extreme_rays.push(i);
            } else {
                redundant.push(i);
            }
        }
        DualDescription {
            extreme_rays,
            redundant,
            facets,
        }
    }

    /// All nonempty faces whose dimension lies in `dims`, each given by the
    /// generators on it together with a verified certificate. Sorted by
    /// dimension, then generator indices.
    pub fn enumerate_faces(&self, dims: RangeInclusive<usize>) -> Vec<Face> {
        let m = self.len();
        let n = sym2_dim(self.g());
        let proj = self.projection();
        let d = proj.pivots.len();
        let mut faces = Vec::new();
        if d == m {
            // simplicial: every subset is a face; dual basis from the adjugate
            let basis = IntMatrix::from_rows(proj.rows.clone()).expect("square");
            let det = basis.det().expect("square");
            let adj = basis.adjugate().expect("square");
            let dual: Vec<Vec<BigInt>> = (0..m)
                .map(|j| {
                    let c = adj.column(j);
                    if det.is_negative() {
                        c.into_iter().map(|x| -x).collect()
                    } else {
                        c
                    }
                })
                .collect();
            for k in dims.clone().filter(|&k| k >= 1 && k <= m) {
                for subset in Combinations::new(m, k) {
                    let mut f = vec![BigInt::zero(); d];
                    for j in (0..m).filter(|j| !subset.contains(j)) {
                        for (a, b) in f.iter_mut().zip(&dual[j]) {
                            *a += b;
                        }
                    }
                    let f = normalize(f);
                    faces.push(Face {
                        certificate: FaceCertificate {
                            functional: proj.lift(&f, n),
                            face: subset.clone(),
                        },
                        generators: subset,
                        dimension: k,
                    });
                }
            }
        } else {
            let dual = self.extreme_rays_and_facets();
            let facet_bits: Vec<Bits> = dual
                .facets
                .iter()
                .map(|f| Bits::from_indices(m, &f.incidence))
                .collect();
            let mut seen: HashSet<Bits> = HashSet::new();
            let mut stack = vec![Bits::full(m)];
            seen.insert(Bits::full(m));
            while let Some(face) = stack.pop() {
                for fb in &facet_bits {
                    let sub = face.and(fb);
                    if !sub.is_empty() && seen.insert(sub.clone()) {
                        stack.push(sub);
                    }
                }
            }
            for bits in seen {
                let generators = bits.indices();
                let rows: Vec<Vec<BigInt>> =
                    generators.iter().map(|&i| proj.rows[i].clone()).collect();
                let dimension = IntMatrix::from_rows(rows).map_or(0, |mm| mm.rank());
                if !dims.contains(&dimension) {
                    continue;
                }
                let mut f = vec![BigInt::zero(); n];
                for (facet, fb) in dual.facets.iter().zip(&facet_bits) {
                    if bits.is_subset(fb) {
                        for (a, b) in f.iter_mut().zip(&facet.normal) {
                            *a += b;
                        }
                    }
                }
                faces.push(Face {
                    certificate: FaceCertificate {
                        functional: normalize(f),
                        face: generators.clone(),
                    },
                    generators,
                    dimension,
                });
            }
        }
        faces.sort_by(|a, b| (a.dimension, &a.generators).cmp(&(b.dimension, &b.generators)));
        debug_assert!(faces.iter().all(|f| f.certificate.verify(self)));
        faces
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: Vec<BigInt>) -> Vec<BigInt> {
    use num_integer::Integer;
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{IntVec, RatForm, SymForm};
    use crate::minvec::shortest_vectors;

    fn cfg(g: usize, vs: &[&[i64]]) -> RayCone {
        RayCone::new(VectorConfig::from_i64(g, vs).unwrap()).unwrap()
    }

    fn min_cone(rows: &[&[i64]]) -> RayCone {
        let q: RatForm = SymForm::from_i64_rows(rows).unwrap().to_rational();
        RayCone::new(shortest_vectors(&q).unwrap().pairs).unwrap()
    }

    fn d4() -> RayCone {
        min_cone(&[
            &[2, -1, 0, 0],
            &[-1, 2, -1, -1],
            &[0, -1, 2, 0],
            &[0, -1, 0, 2],
        ])
    }

    fn a4() -> RayCone {
        min_cone(&[&[2, 1, 1, 1], &[1, 2, 1, 1], &[1, 1, 2, 1], &[1, 1, 1, 2]])
    }

    fn a2() -> RayCone {
        cfg(2, &[&[1, 0], &[0, 1], &[1, 1]])
    }

    fn a3() -> RayCone {
        min_cone(&[&[2, 1, 1], &[1, 2, 1], &[1, 1, 2]])
    }

    #[test]
    fn dimensions() {
        assert_eq!(a2().dimension(), 3);
        assert_eq!(d4().dimension(), 10);
        assert_eq!(d4().len(), 12);
        assert_eq!(cfg(3, &[&[1, 0, 0]]).dimension(), 1);
    }

    #[test]
    fn simpliciality() {
        assert!(!d4().is_simplicial());
        assert!(a4().is_simplicial());
        assert_eq!(a4().len(), 10);
        assert!(cfg(2, &[&[1, 1], &[1, -1]]).is_simplicial());
    }

    #[test]
    fn basicness_and_index() {
        assert!(a2().is_basic());
        let toy = cfg(2, &[&[1, 1], &[1, -1]]);
        assert!(!toy.is_basic());
        assert_eq!(toy.sublattice_index(), BigInt::from(2));
        assert!(!d4().is_basic());
        assert_eq!(a2().sublattice_index(), BigInt::one());
    }

    #[test]
    fn faces_of_simplicial_cone_are_subsets() {
        let c = a2();
        for k in 1..=3 {
            for s in Combinations::new(3, k) {
                let cert = c.is_face(&s).unwrap().expect("face");
                assert!(cert.verify(&c));
            }
        }
    }

    #[test]
    fn improper_face_has_zero_functional() {
        let c = d4();
        let all: Vec<usize> = (0..12).collect();
        let cert = c.is_face(&all).unwrap().unwrap();
        assert!(cert.functional.iter().all(Zero::is_zero));
    }

    #[test]
    fn d4_eleven_ray_subsets_are_not_faces() {
        let c = d4();
        let dual = c.extreme_rays_and_facets();
        // oracle: no facet (hence no proper face) contains 11 generators
        assert!(dual.facets.iter().all(|f| f.incidence.len() < 11));
        for drop in [0, 5, 11] {
            let s: Vec<usize> = (0..12).filter(|&i| i != drop).collect();
            assert_eq!(c.is_face(&s).unwrap(), None);
        }
    }

    #[test]
    fn out_of_range_subset_is_error() {
        assert!(a2().is_face(&[3]).is_err());
    }

    #[test]
    fn dual_description_of_simplicial_cones() {
        let dual = a2().extreme_rays_and_facets();
        assert_eq!(dual.extreme_rays.len(), 3);
        assert_eq!(dual.facets.len(), 3);
        let dual = a3().extreme_rays_and_facets();
        assert_eq!(dual.extreme_rays.len(), 6);
        assert_eq!(dual.facets.len(), 6);
    }

    #[test]
    fn d4_dual_description() {
        let c = d4();
        let dual = c.extreme_rays_and_facets();
        assert_eq!(dual.extreme_rays.len(), 12);
        assert!(dual.redundant.is_empty());
        // regression value from the double description run
        assert_eq!(dual.facets.len(), 64);
        for f in &dual.facets {
            let cert = FaceCertificate {
                functional: f.normal.clone(),
                face: f.incidence.clone(),
            };
            assert!(cert.verify(&c));
            let sub = RayCone::new(c.generators().subset(&f.incidence)).unwrap();
            assert_eq!(sub.dimension(), 9);
        }
    }

    #[test]
    fn face_counts_of_simplicial_domains() {
        assert_eq!(a2().enumerate_faces(1..=3).len(), 7);
        let faces = a2().enumerate_faces(1..=3);
        let per_dim: Vec<usize> = (1..=3)
            .map(|k| faces.iter().filter(|f| f.dimension == k).count())
            .collect();
        assert_eq!(per_dim, vec![3, 3, 1]);
        assert_eq!(a3().enumerate_faces(1..=6).len(), 63);
    }

    #[test]
    fn d4_faces_low_dimensions_basic() {
        let c = d4();
        let faces = c.enumerate_faces(1..=10);
        assert!(faces.iter().all(|f| f.certificate.verify(&c)));
        for f in &faces {
            let sub = f.cone(&c);
            assert_eq!(sub.dimension(), f.dimension);
            if f.dimension <= 9 {
                assert!(sub.is_basic(), "face {:?}", f.generators);
            }
            if sub.is_basic() {
                assert!(sub.is_simplicial());
            }
            if sub.is_simplicial() {
                assert_eq!(sub.sublattice_index().is_one(), sub.is_basic());
            }
        }
        assert_eq!(faces.iter().filter(|f| f.dimension == 10).count(), 1);
    }

    #[test]
    fn lp_and_enumeration_agree_on_d4_samples() {
        let c = d4();
        let faces: HashSet<Vec<usize>> = c
            .enumerate_faces(1..=10)
            .into_iter()
            .map(|f| f.generators)
            .collect();
        for k in [2usize, 3, 5, 9] {
            for s in Combinations::new(12, k).step_by(7).take(20) {
                let lp = c.is_face(&s).unwrap().is_some();
                assert_eq!(lp, faces.contains(&s), "subset {s:?}");
            }
        }
    }

    #[test]
    fn faces_of_faces_are_faces() {
        for c in [a3(), d4()] {
            let all: HashSet<Vec<usize>> = c
                .enumerate_faces(1..=10)
                .into_iter()
                .map(|f| f.generators)
                .collect();
            for f in c.enumerate_faces(1..=10).iter().step_by(5) {
                let sub = f.cone(&c);
                for ff in sub.enumerate_faces(1..=10) {
                    let lifted: Vec<usize> =
                        ff.generators.iter().map(|&i| f.generators[i]).collect();
                    assert!(all.contains(&lifted));
                }
            }
        }
    }

    #[test]
    fn empty_cone_rejected() {
        assert_eq!(
            RayCone::new(VectorConfig::new(2, vec![]).unwrap()),
            Err(Error::EmptyConfig)
        );
        let _ = IntVec::zero(1);
    }
}
