//! `GL_g(Z)`-equivalence of vector configurations.
//!
//! If `U` maps `{±a_i}` onto `{±b_j}` then `Q_b = U Q_a U^t` for the
//! characteristic forms, hence `adj(Q_b) = U^{-t} adj(Q_a) U^{-1}` and the
//! products `a_i^t adj(Q_a) a_k` are preserved up to the sign choices on
//! pairs. These values bucket the configurations and prune a backtracking
//! search that assigns images to a basis drawn from `a` and solves for `U`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactlinalg::IntMatrix;
use crate::forms::{saturate, IntVec, VectorConfig};

/// `GL_g(Z)` invariants of a spanning configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub dimension: usize,
    pub pair_count: usize,
    /// `det Q_V` for the characteristic form `Q_V = sum p(v_i)`.
    pub det: BigInt,
    /// Sorted `v_i^t adj(Q_V) v_i`.
    pub values: Vec<BigInt>,
    /// Sorted `|v_i^t adj(Q_V) v_k|` over `i < k`.
    pub pair_values: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivWitness {
    pub u: IntMatrix,
}

impl EquivWitness {
    /// `|det U| = 1` and `U` maps the pairs of `a` onto those of `b`.
    pub fn verify(&self, a: &VectorConfig, b: &VectorConfig) -> bool {
        self.u.det().is_ok_and(|d| d.abs().is_one())
            && a.transform(&self.u).is_ok_and(|img| img.same_pairs(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutGroup {
    pub generators: Vec<IntMatrix>,
    pub order: BigInt,
}

/// Gram data of a spanning configuration under `adj(Q_V)`.
struct Gram {
    vectors: Vec<IntVec>,
    /// `gram[i][k] = v_i^t adj(Q_V) v_k`.
    gram: Vec<Vec<BigInt>>,
    det: BigInt,
}

impl Gram {
    fn new(config: &VectorConfig) -> Result<Self> {
        if !config.spans() {
            return Err(Error::NotSpanning {
                rank: config.span_rank(),
                dim: config.g(),
            });
        }
        let q = config.characteristic_form().to_matrix();
        let det = q.det()?;
        let adj = q.adjugate()?;
        let vectors = config.pairs().to_vec();
        let images: Vec<Vec<BigInt>> = vectors.iter().map(|v| adj.apply(&v.0)).collect();
        let gram = vectors
            .iter()
            .map(|v| {
                images
                    .iter()
                    .map(|w| v.0.iter().zip(w).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        Ok(Self { vectors, gram, det })
    }

    fn fingerprint(&self) -> Fingerprint {
        let m = self.vectors.len();
        let mut values: Vec<BigInt> = (0..m).map(|i| self.gram[i][i].clone()).collect();
        values.sort();
        let mut pair_values = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for i in 0..m {
            for k in i + 1..m {
                pair_values.push(self.gram[i][k].abs());
            }
        }
        pair_values.sort();
        Fingerprint {
            dimension: self.vectors.first().map_or(0, IntVec::len),
            pair_count: m,
            det: self.det.clone(),
            values,
            pair_values,
        }
    }
}

pub fn fingerprint(config: &VectorConfig) -> Result<Fingerprint> {
    Ok(Gram::new(config)?.fingerprint())
}

/// Greedy choice of `g` linearly independent pairs, preferring rare values.
fn spanning_indices(gram: &Gram) -> Vec<usize> {
    let m = gram.vectors.len();
    let g = gram.vectors[0].len();
    let mut freq: BTreeMap<&BigInt, usize> = BTreeMap::new();
    for i in 0..m {
        *freq.entry(&gram.gram[i][i]).or_default() += 1;
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (freq[&gram.gram[i][i]], i));
    let mut chosen: Vec<usize> = Vec::with_capacity(g);
    for i in order {
        let mut rows: Vec<Vec<BigInt>> =
            chosen.iter().map(|&k| gram.vectors[k].0.clone()).collect();
        rows.push(gram.vectors[i].0.clone());
        if IntMatrix::from_rows(rows).is_ok_and(|mat| mat.rank() == chosen.len() + 1) {
            chosen.push(i);
            if chosen.len() == g {
                break;
            }
        }
    }
    chosen
}

struct Search<'a> {
    a: &'a Gram,
    b: &'a Gram,
    a_config: &'a VectorConfig,
    b_config: &'a VectorConfig,
    basis: Vec<usize>,
    /// Columns `a_{basis}`; `U = B_img adj(A) / det(A)`.
    a_adj: IntMatrix,
    a_det: BigInt,
    /// `(pair index in b, sign)` per assigned position.
    images: Vec<(usize, bool)>,
    /// Fix the sign of the first image (quotient by `±I`).
    fix_first_sign: bool,
}

impl Search<'_> {
    fn signed_gram_b(&self, (j, sj): (usize, bool), (k, sk): (usize, bool)) -> BigInt {
        let v = &self.b.gram[j][k];
        if sj == sk {
            v.clone()
        } else {
            -v
        }
    }

    fn candidates(&self, t: usize) -> Vec<(usize, bool)> {
        let ai = self.basis[t];
        let want = &self.a.gram[ai][ai];
        let mut out = Vec::new();
        for j in 0..self.b.vectors.len() {
            if self.b.gram[j][j] != *want || self.images.iter().any(|&(k, _)| k == j) {
                continue;
            }
            let signs: &[bool] = if t == 0 && self.fix_first_sign {
                &[true]
            } else {
                &[true, false]
            };
            for &s in signs {
                let ok = self.images.iter().enumerate().all(|(r, &img)| {
                    self.signed_gram_b(img, (j, s)) == self.a.gram[self.basis[r]][ai]
                });
                if ok {
                    out.push((j, s));
                }
            }
        }
        out
    }

    fn solve(&self) -> Option<IntMatrix> {
        let g = self.basis.len();
        let mut img = IntMatrix::zeros(g, g);
        for (c, &(j, s)) in self.images.iter().enumerate() {
            for r in 0..g {
                let x = &self.b.vectors[j].0[r];
                img[(r, c)] = if s { x.clone() } else { -x };
            }
        }
        let prod = &img * &self.a_adj;
        let mut u = IntMatrix::zeros(g, g);
        for r in 0..g {
            for c in 0..g {
                let x = &prod[(r, c)];
                if !(x % &self.a_det).is_zero() {
                    return None;
                }
                u[(r, c)] = x / &self.a_det;
            }
        }
        if !u.det().ok()?.abs().is_one() {
            return None;
        }
        let image = self.a_config.transform(&u).ok()?;
        image.same_pairs(self.b_config).then_some(u)
    }

    /// Visits every witness; `visit` returns false to stop.
    fn run(&mut self, visit: &mut dyn FnMut(IntMatrix) -> bool) -> bool {
        let t = self.images.len();
        if t == self.basis.len() {
            return match self.solve() {
                Some(u) => visit(u),
                None => true,
            };
        }
        for cand in self.candidates(t) {
            self.images.push(cand);
            let go_on = self.run(visit);
            self.images.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
}

fn search(
    a: &VectorConfig,
    b: &VectorConfig,
    fix_first_sign: bool,
    visit: &mut dyn FnMut(IntMatrix) -> bool,
) -> Result<()> {
    let ga = Gram::new(a)?;
    let gb = Gram::new(b)?;
    if a.g() != b.g() || ga.fingerprint() != gb.fingerprint() {
        return Ok(());
    }
    let basis = spanning_indices(&ga);
    let g = a.g();
    let mut cols = IntMatrix::zeros(g, g);
    for (c, &i) in basis.iter().enumerate() {
        for r in 0..g {
            cols[(r, c)] = ga.vectors[i].0[r].clone();
        }
    }
    let mut s = Search {
        a: &ga,
        b: &gb,
        a_config: a,
        b_config: b,
        basis,
        a_adj: cols.adjugate()?,
        a_det: cols.det()?,
        images: Vec::new(),
        fix_first_sign,
    };
    s.run(visit);
    Ok(())
}

/// Signed permutation matrices in a fixed order: permutations
/// lexicographically, then sign patterns with `-` bits counted upward from
/// the last coordinate.
fn signed_permutations(g: usize) -> impl Iterator<Item = IntMatrix> {
    let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..g {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                (0..g)
                    .filter(|i| !p.contains(i))
                    .map(|i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    perms.into_iter().flat_map(move |p| {
        (0u32..1 << g).map(move |signs| {
            let mut u = IntMatrix::zeros(g, g);
            for (r, &c) in p.iter().enumerate() {
                let neg = signs >> (g - 1 - r) & 1 == 1;
                u[(r, c)] = if neg { -BigInt::one() } else { BigInt::one() };
            }
            u
        })
    })
}

/// Largest `g` for which signed permutations are tried before backtracking.
const SIGNED_PERMUTATION_LIMIT: usize = 4;

/// A verified unimodular `U` with `U·{±a_i} = {±b_j}`, or `None`. Signed
/// permutations are tried first for small `g`, so simple witnesses are
/// preferred.
pub fn are_equivalent(a: &VectorConfig, b: &VectorConfig) -> Result<Option<EquivWitness>> {
    find_witness(a, b, a.g() <= SIGNED_PERMUTATION_LIMIT)
}

fn find_witness(
    a: &VectorConfig,
    b: &VectorConfig,
    try_permutations: bool,
) -> Result<Option<EquivWitness>> {
    let fa = fingerprint(a)?;
    let fb = fingerprint(b)?;
    if a.g() != b.g() || fa != fb {
        return Ok(None);
    }
    if try_permutations {
        for u in signed_permutations(a.g()) {
            let w = EquivWitness { u };
            if w.verify(a, b) {
                return Ok(Some(w));
            }
        }
    }
    let mut found: Option<IntMatrix> = None;
    search(a, b, true, &mut |u| {
        found = Some(u);
        false
    })?;
    match found {
        Some(u) => {
            let w = EquivWitness { u };
            if !w.verify(a, b) {
                return Err(Error::Invalid(
                    "equivalence witness failed verification".into(),
                ));
            }
            Ok(Some(w))
        }
        None => Ok(None),
    }
}

/// Every element of the stabilizer of the pair set, sorted.
pub fn automorphisms(config: &VectorConfig) -> Result<Vec<IntMatrix>> {
    let mut all = Vec::new();
    search(config, config, false, &mut |u| {
        all.push(u);
        true
    })?;
    all.sort();
    Ok(all)
}

fn closure(gens: &[IntMatrix], g: usize) -> HashSet<IntMatrix> {
    let id = IntMatrix::identity(g);
    let mut seen: HashSet<IntMatrix> = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        for s in gens {
            let y = &x * s;
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    seen
}

pub fn automorphism_group(config: &VectorConfig) -> Result<AutGroup> {
    let elements = automorphisms(config)?;
    let g = config.g();
    let mut generators: Vec<IntMatrix> = Vec::new();
    let mut generated = closure(&generators, g);
    for x in &elements {
        if !generated.contains(x) {
            generators.push(x.clone());
            generated = closure(&generators, g);
        }
    }
    if generated.len() != elements.len() {
        return Err(Error::Invalid(format!(
            "generated group has {} elements, stabilizer has {}",
            generated.len(),
            elements.len()
        )));
    }
    Ok(AutGroup {
        generators,
        order: BigInt::from(elements.len()),
    })
}

/// One representative per `GL_g(Z)` orbit, each the least canonical member
/// of its orbit among the inputs; sorted.
pub fn dedup_orbits(configs: &[VectorConfig]) -> Result<Vec<VectorConfig>> {
    Ok(orbit_classes(configs)?
        .into_iter()
        .map(|class| class.representative)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitClass {
    pub representative: VectorConfig,
    /// Indices into the input of every member of the orbit.
    pub members: Vec<usize>,
}

type BucketKey = (usize, usize, Fingerprint);

/// Partition of the inputs into orbits; equivalence is decided on
/// saturations, so configurations of lower rank are handled too.
pub fn orbit_classes(configs: &[VectorConfig]) -> Result<Vec<OrbitClass>> {
    let prepared = configs
        .par_iter()
        .map(|c| {
            let canon = c.canonical();
            let (sat, _) = saturate(&canon)?;
            let fp = fingerprint(&sat)?;
            Ok(((canon.g(), sat.g(), fp), canon, sat))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut buckets: BTreeMap<BucketKey, BTreeMap<VectorConfig, (VectorConfig, Vec<usize>)>> =
        BTreeMap::new();
    for (idx, (key, canon, sat)) in prepared.into_iter().enumerate() {
        buckets
            .entry(key)
            .or_default()
            .entry(canon)
            .or_insert_with(|| (sat, Vec::new()))
            .1
            .push(idx);
    }
    let buckets: Vec<_> = buckets.into_values().collect();
    let per_bucket = buckets
        .into_par_iter()
        .map(|members| {
            let mut classes: Vec<(VectorConfig, VectorConfig, Vec<usize>)> = Vec::new();
            for (canon, (sat, idx)) in members {
                let mut placed = false;
                for (_, rep_sat, rep_idx) in classes.iter_mut() {
                    if find_witness(&sat, rep_sat, false)?.is_some() {
                        rep_idx.extend(idx.iter().copied());
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    classes.push((canon, sat, idx));
                }
            }
            Ok(classes)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<OrbitClass> = per_bucket
        .into_iter()
        .flatten()
        .map(|(representative, _, mut members)| {
            members.sort_unstable();
            OrbitClass {
                representative,
                members,
            }
        })
        .collect();
    out.sort_by(|x, y| x.representative.cmp(&y.representative));
    Ok(out)
}

/// Pairs of `config` grouped into orbits of its automorphism group, as
/// sorted index lists.
pub fn vector_orbits(vectors: &[IntVec], group: &[IntMatrix]) -> Vec<Vec<usize>> {
    let index: BTreeMap<&IntVec, usize> = vectors.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut orbits = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if seen.contains(&i) {
            continue;
        }
        let mut orbit: BTreeSet<usize> = BTreeSet::from([i]);
        for u in group {
            let w = IntVec(u.apply(&v.0)).sign_canonical();
            if let Some(&k) = index.get(&w) {
                orbit.insert(k);
            }
        }
        seen.extend(orbit.iter().copied());
        orbits.push(orbit.into_iter().collect());
    }
    orbits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::SymForm;
    use crate::minvec::shortest_vectors;

    fn cfg(g: usize, vs: &[&[i64]]) -> VectorConfig {
        VectorConfig::from_i64(g, vs).unwrap()
    }

    fn a2() -> VectorConfig {
        cfg(2, &[&[1, 0], &[0, 1], &[1, 1]])
    }

    fn d4() -> VectorConfig {
        let q = SymForm::from_i64_rows(&[
            &[2, -1, 0, 0],
            &[-1, 2, -1, -1],
            &[0, -1, 2, 0],
            &[0, -1, 0, 2],
        ])
        .unwrap()
        .to_rational();
        shortest_vectors(&q).unwrap().pairs
    }

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    /// Every matrix with entries in `[-r, r]` and `|det| = 1` preserving the pairs.
    fn brute_force_stabilizer(c: &VectorConfig, r: i64) -> usize {
        let g = c.g();
        let side = (2 * r + 1) as usize;
        let mut count = 0;
        for code in 0..side.pow((g * g) as u32) {
            let mut x = code;
            let data: Vec<BigInt> = (0..g * g)
                .map(|_| {
                    let d = (x % side) as i64 - r;
                    x /= side;
                    BigInt::from(d)
                })
                .collect();
            let u = IntMatrix::new(g, g, data).unwrap();
            if (EquivWitness { u }).verify(c, c) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn fingerprint_examples() {
        let fp = fingerprint(&cfg(2, &[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(fp.pair_count, 2);
        assert_eq!(fp.det, BigInt::one());
        assert_eq!(fp.values, vec![BigInt::one(), BigInt::one()]);
        let shear = a2().transform(&m(&[&[1, 1], &[0, 1]])).unwrap();
        assert_eq!(fingerprint(&a2()).unwrap(), fingerprint(&shear).unwrap());
        assert_ne!(fingerprint(&a2()).unwrap(), fp);
        assert!(matches!(
            fingerprint(&cfg(2, &[&[1, 1]])),
            Err(Error::NotSpanning { rank: 1, dim: 2 })
        ));
    }

    #[test]
    fn equivalence_examples() {
        let b = cfg(2, &[&[1, 0], &[0, 1], &[1, -1]]);
        let w = are_equivalent(&a2(), &b).unwrap().unwrap();
        assert_eq!(w.u, m(&[&[1, 0], &[0, -1]]));
        let id = are_equivalent(&a2(), &a2()).unwrap().unwrap();
        assert!(id.u.is_identity());
        assert!(are_equivalent(&a2(), &cfg(2, &[&[1, 0], &[0, 1], &[2, 1]]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn backtracking_finds_non_permutation_witnesses() {
        let u = m(&[&[2, 1, 0, 0], &[1, 1, 0, 0], &[0, 3, 1, 0], &[1, 0, 0, 1]]);
        let img = d4().transform(&u).unwrap();
        let w = are_equivalent(&d4(), &img).unwrap().unwrap();
        assert!(w.verify(&d4(), &img));
    }

    #[test]
    fn automorphism_orders() {
        assert_eq!(
            automorphism_group(&cfg(2, &[&[1, 0], &[0, 1]]))
                .unwrap()
                .order,
            8.into()
        );
        assert_eq!(automorphism_group(&a2()).unwrap().order, 12.into());
        let d4_group = automorphism_group(&d4()).unwrap();
        assert_eq!(d4_group.order, 1152.into());
        for u in &d4_group.generators {
            assert!((EquivWitness { u: u.clone() }).verify(&d4(), &d4()));
        }
    }

    #[test]
    fn automorphisms_match_brute_force_at_g2() {
        for c in [
            a2(),
            cfg(2, &[&[1, 0], &[0, 1]]),
            cfg(2, &[&[1, 0], &[1, 2]]),
        ] {
            assert_eq!(
                automorphisms(&c).unwrap().len(),
                brute_force_stabilizer(&c, 2)
            );
        }
    }

    #[test]
    fn dedup_examples() {
        let shear = a2().transform(&m(&[&[1, 1], &[0, 1]])).unwrap();
        let reps = dedup_orbits(&[a2(), shear, cfg(2, &[&[1, 0], &[0, 1]])]).unwrap();
        assert_eq!(reps.len(), 2);
        assert!(dedup_orbits(&[]).unwrap().is_empty());
        let singles: Vec<VectorConfig> = [[1, 0], [0, 1], [1, 1], [2, 1]]
            .iter()
            .map(|v| cfg(2, &[v]))
            .collect();
        let reps = dedup_orbits(&singles).unwrap();
        assert_eq!(reps, vec![cfg(2, &[&[0, 1]])]);
    }

    #[test]
    fn vector_orbits_of_a2() {
        let group = automorphisms(&a2()).unwrap();
        let c = a2();
        assert_eq!(vector_orbits(c.pairs(), &group), vec![vec![0, 1, 2]]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn unimodular(g: usize) -> impl Strategy<Value = IntMatrix> {
            // product of elementary shears and a signed permutation
            (
                proptest::collection::vec((0..g, 0..g, -2i64..=2), 0..6),
                (0..(1..=g).product::<usize>() << g)
                    .prop_map(move |k| signed_permutations(g).nth(k).unwrap()),
            )
                .prop_map(move |(shears, p)| {
                    let mut u = p;
                    for (i, j, k) in shears {
                        if i != j {
                            let mut e = IntMatrix::identity(g);
                            e[(i, j)] = BigInt::from(k);
                            u = &u * &e;
                        }
                    }
                    u
                })
        }

        fn pool() -> Vec<VectorConfig> {
            vec![
                a2(),
                cfg(2, &[&[1, 0], &[0, 1]]),
                cfg(2, &[&[1, 0], &[1, 2]]),
                cfg(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]),
                cfg(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 0]]),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn fingerprint_is_invariant(k in 0usize..5, u2 in unimodular(2), u3 in unimodular(3)) {
                let c = &pool()[k];
                let u = if c.g() == 2 { u2 } else { u3 };
                let img = c.transform(&u).unwrap();
                prop_assert_eq!(fingerprint(c).unwrap(), fingerprint(&img).unwrap());
                let w = are_equivalent(c, &img).unwrap().unwrap();
                prop_assert!(w.verify(c, &img));
            }

            #[test]
            fn equivalence_composes(u in unimodular(3), v in unimodular(3)) {
                let a = cfg(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]);
                let b = a.transform(&u).unwrap();
                let c = b.transform(&v).unwrap();
                let ab = are_equivalent(&a, &b).unwrap().unwrap();
                let bc = are_equivalent(&b, &c).unwrap().unwrap();
                let ba = are_equivalent(&b, &a).unwrap().unwrap();
                let composed = EquivWitness { u: &bc.u * &ab.u };
                let inverse = EquivWitness { u: ab.u.unimodular_inverse().unwrap() };
                prop_assert!(composed.verify(&a, &c));
                prop_assert!(inverse.verify(&b, &a));
                prop_assert!(ba.verify(&b, &a));
            }
        }
    }
}
