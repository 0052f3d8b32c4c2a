//! Orbit classification of perfect cones: faces of the built-in perfect
//! domains, and simplicial cones with `g + 1` generators grown from bases.
//!
//! Extension candidates: for a base matrix `V` (columns `b_1..b_g`) with
//! index `i = |det V|`, replacing `b_j` by `v` gives a system of determinant
//! `(adj(V) v)_j`. Requiring every such determinant to be at most `i` in
//! absolute value keeps `V` of maximal index and confines `y = adj(V) v` to
//! the box `[-i, i]^g`; the candidates are the integral `v = V y / det V`.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cone::RayCone;
use crate::domains::builtin_domains;
use crate::equiv::{automorphisms, orbit_classes, vector_orbits};
use crate::error::{Error, Result};
use crate::exactlinalg::Combinations;
use crate::forms::{sym2_dim, IntVec, VectorConfig};
use crate::realize::{is_perfect_cone_config, RealizabilityVerdict};

/// `g` linearly independent primitive vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSystem {
    vectors: VectorConfig,
    index: BigInt,
}

impl BaseSystem {
    pub fn new(vectors: VectorConfig) -> Result<Self> {
        let g = vectors.g();
        if vectors.len() != g {
            return Err(Error::ShapeMismatch {
                expected: g,
                got: vectors.len(),
            });
        }
        let det = vectors.vector_matrix()?.det()?;
        if det.is_zero() {
            return Err(Error::RankDeficient);
        }
        Ok(Self {
            vectors,
            index: det.abs(),
        })
    }

    pub fn standard(g: usize) -> Self {
        let units = (0..g).map(|i| IntVec::unit(g, i)).collect();
        Self::new(VectorConfig::new(g, units).expect("unit vectors")).expect("identity basis")
    }

    pub fn vectors(&self) -> &VectorConfig {
        &self.vectors
    }

    pub fn index(&self) -> &BigInt {
        &self.index
    }

    pub fn g(&self) -> usize {
        self.vectors.g()
    }
}

/// Sign-canonical primitive `v`, not a base vector, with every determinant
/// obtained by swapping `v` into the base bounded by the index. Sorted.
pub fn extension_candidates(base: &BaseSystem) -> Vec<IntVec> {
    let g = base.g();
    let cols = base.vectors.vector_matrix().expect("nonempty").transpose();
    let det = cols.det().expect("square");
    let i = base.index.clone();
    let mut out = Vec::new();
    let mut y = vec![-i.clone(); g];
    loop {
        let num = cols.apply(&y);
        if num.iter().all(|x| (x % &det).is_zero()) {
            let v = IntVec(num.into_iter().map(|x| x / &det).collect());
            if !v.is_zero()
                && v.is_sign_canonical()
                && v.is_primitive()
                && !base.vectors.contains(&v)
            {
                out.push(v);
            }
        }
        // odometer over [-i, i]^g
        let mut k = 0;
        loop {
            if k == g {
                out.sort();
                return out;
            }
            y[k] += 1;
            if y[k] > i {
                y[k] = -i.clone();
                k += 1;
            } else {
                break;
            }
        }
    }
}

/// Thread-safe memo of realizability verdicts keyed by canonical form.
#[derive(Default)]
pub struct RealizeCache {
    verdicts: Mutex<HashMap<VectorConfig, bool>>,
}

impl RealizeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_realizable(&self, config: &VectorConfig) -> Result<bool> {
        let key = config.canonical();
        if let Some(&v) = self.verdicts.lock().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let RealizabilityVerdict { realizable, .. } = is_perfect_cone_config(&key)?;
        self.verdicts
            .lock()
            .expect("cache lock")
            .insert(key, realizable);
        Ok(realizable)
    }

    pub fn len(&self) -> usize {
        self.verdicts.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitEntry {
    pub vectors: VectorConfig,
    pub basic: bool,
    pub simplicial: bool,
    pub index: BigInt,
}

impl OrbitEntry {
    pub fn from_config(vectors: VectorConfig) -> Result<Self> {
        let cone = RayCone::new(vectors.clone())?;
        Ok(Self {
            vectors,
            basic: cone.is_basic(),
            simplicial: cone.is_simplicial(),
            index: cone.sublattice_index(),
        })
    }

    /// Flags recomputed from the vectors agree with the stored ones.
    pub fn recheck(&self) -> Result<bool> {
        Ok(Self::from_config(self.vectors.clone())? == *self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DimOrbits {
    pub orbits: Vec<OrbitEntry>,
}

impl DimOrbits {
    pub fn count(&self) -> usize {
        self.orbits.len()
    }
}

/// Orbit representatives per cone dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitReport {
    pub g: usize,
    /// Labels of the sources: domain names or base systems.
    pub domains: Vec<String>,
    pub dims: BTreeMap<usize, DimOrbits>,
}

fn vec_json(v: &IntVec) -> Value {
    Value::Array(v.0.iter().map(|x| Value::String(x.to_string())).collect())
}

fn json_int(v: &Value, what: &str) -> Result<BigInt> {
    v.as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Invalid(format!("{what}: expected a decimal string")))
}

fn json_count(v: &Value, what: &str) -> Result<usize> {
    v.as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Invalid(format!("{what}: expected a decimal count")))
}

impl OrbitReport {
    pub fn new(g: usize, domains: Vec<String>) -> Self {
        Self {
            g,
            domains,
            dims: BTreeMap::new(),
        }
    }

    pub fn total_orbits(&self) -> usize {
        self.dims.values().map(DimOrbits::count).sum()
    }

    pub fn to_json(&self) -> Value {
        let mut dims = Map::new();
        for (dim, entry) in &self.dims {
            let orbits: Vec<Value> = entry
                .orbits
                .iter()
                .map(|o| {
                    json!({
                        "vectors": o.vectors.pairs().iter().map(vec_json).collect::<Vec<_>>(),
                        "basic": o.basic,
                        "simplicial": o.simplicial,
                        "index": o.index.to_string(),
                    })
                })
                .collect();
            dims.insert(
                dim.to_string(),
                json!({ "count": entry.count().to_string(), "orbits": orbits }),
            );
        }
        json!({
            "g": self.g.to_string(),
            "domains": self.domains,
            "dims": Value::Object(dims),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("report: {e}")))?;
        let g = json_count(&v["g"], "g")?;
        let domains = v["domains"]
            .as_array()
            .ok_or_else(|| Error::Invalid("domains: expected an array".into()))?
            .iter()
            .map(|d| {
                d.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::Invalid("domains: expected strings".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut report = Self::new(g, domains);
        let dims = v["dims"]
            .as_object()
            .ok_or_else(|| Error::Invalid("dims: expected an object".into()))?;
        for (key, entry) in dims {
            let dim: usize = key
                .parse()
                .map_err(|_| Error::Invalid(format!("dims: bad dimension {key}")))?;
            let orbits = entry["orbits"]
                .as_array()
                .ok_or_else(|| Error::Invalid("orbits: expected an array".into()))?
                .iter()
                .map(|o| {
                    let vectors = o["vectors"]
                        .as_array()
                        .ok_or_else(|| Error::Invalid("vectors: expected an array".into()))?
                        .iter()
                        .map(|row| {
                            row.as_array()
                                .ok_or_else(|| Error::Invalid("vector: expected an array".into()))?
                                .iter()
                                .map(|x| json_int(x, "vector entry"))
                                .collect::<Result<Vec<_>>>()
                                .map(IntVec)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let flag = |name: &str| {
                        o[name]
                            .as_bool()
                            .ok_or_else(|| Error::Invalid(format!("{name}: expected a bool")))
                    };
                    Ok(OrbitEntry {
                        vectors: VectorConfig::new(g, vectors)?,
                        basic: flag("basic")?,
                        simplicial: flag("simplicial")?,
                        index: json_int(&o["index"], "index")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let count = json_count(&entry["count"], "count")?;
            if count != orbits.len() {
                return Err(Error::Invalid(format!(
                    "dimension {dim}: count {count} but {} orbits",
                    orbits.len()
                )));
            }
            report.dims.insert(dim, DimOrbits { orbits });
        }
        Ok(report)
    }
}

/// Simplicial perfect cones with `g + 1` pairs extending the bases; also
/// lists the bases that were skipped because they are not realizable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionOutcome {
    pub report: OrbitReport,
    pub rejected_bases: Vec<BaseSystem>,
    /// Extended systems that passed every test, before orbit reduction.
    pub accepted_systems: usize,
}

pub fn extend_and_classify(bases: &[BaseSystem], target_dim: usize) -> Result<ExtensionOutcome> {
    let Some(g) = bases.first().map(BaseSystem::g) else {
        return Err(Error::Invalid("no base systems given".into()));
    };
    if target_dim != g + 1 {
        return Err(Error::UnsupportedTarget {
            g,
            target: target_dim,
        });
    }
    if let Some(b) = bases.iter().find(|b| b.g() != g) {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: b.g(),
        });
    }
    let cache = RealizeCache::new();
    let mut rejected = Vec::new();
    let mut accepted: Vec<VectorConfig> = Vec::new();
    for base in bases {
        if !cache.is_realizable(&base.vectors)? {
            rejected.push(base.clone());
            continue;
        }
        let candidates = extension_candidates(base);
        let group = automorphisms(&base.vectors)?;
        let reps: Vec<IntVec> = vector_orbits(&candidates, &group)
            .into_iter()
            .map(|orbit| candidates[orbit[0]].clone())
            .collect();
        let found = reps
            .par_iter()
            .map(|v| -> Result<Option<VectorConfig>> {
                let system = base.vectors.with(v.clone())?;
                for subset in Combinations::new(g + 1, g) {
                    if !subset.contains(&g) {
                        continue;
                    }
                    let sub = system.subset(&subset);
                    if sub.spans() && !cache.is_realizable(&sub)? {
                        return Ok(None);
                    }
                }
                if !RayCone::new(system.clone())?.is_simplicial() {
                    return Ok(None);
                }
                Ok(cache.is_realizable(&system)?.then_some(system))
            })
            .collect::<Result<Vec<_>>>()?;
        accepted.extend(found.into_iter().flatten());
    }
    let accepted_systems = accepted.len();
    let classes = orbit_classes(&accepted)?;
    let labels = bases
        .iter()
        .map(|b| format!("base {}", pairs_label(&b.vectors)))
        .collect();
    let mut report = OrbitReport::new(g, labels);
    let orbits = classes
        .into_par_iter()
        .map(|c| OrbitEntry::from_config(c.representative))
        .collect::<Result<Vec<_>>>()?;
    report.dims.insert(target_dim, DimOrbits { orbits });
    Ok(ExtensionOutcome {
        report,
        rejected_bases: rejected,
        accepted_systems,
    })
}

fn pairs_label(c: &VectorConfig) -> String {
    let parts: Vec<String> = c.pairs().iter().map(|v| format!("({v})")).collect();
    parts.join(" ")
}

/// A labelled cone whose faces are classified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedCone {
    pub name: String,
    pub cone: RayCone,
}

/// Orbits under `GL_g(Z)` of all faces of the given cones with dimension in
/// `dims`, merged across cones.
pub fn classify_faces(domains: &[NamedCone], dims: RangeInclusive<usize>) -> Result<OrbitReport> {
    let Some(g) = domains.first().map(|d| d.cone.g()) else {
        return Err(Error::Invalid("no domains given".into()));
    };
    if let Some(d) = domains.iter().find(|d| d.cone.g() != g) {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: d.cone.g(),
        });
    }
    let mut by_dim: BTreeMap<usize, Vec<VectorConfig>> = BTreeMap::new();
    for d in domains {
        for face in d.cone.enumerate_faces(dims.clone()) {
            by_dim
                .entry(face.dimension)
                .or_default()
                .push(face.config(&d.cone));
        }
    }
    let mut report = OrbitReport::new(g, domains.iter().map(|d| d.name.clone()).collect());
    for dim in dims.clone().filter(|&k| k >= 1 && k <= sym2_dim(g)) {
        let configs = by_dim.remove(&dim).unwrap_or_default();
        let orbits = orbit_classes(&configs)?
            .into_par_iter()
            .map(|c| OrbitEntry::from_config(c.representative))
            .collect::<Result<Vec<_>>>()?;
        report.dims.insert(dim, DimOrbits { orbits });
    }
    Ok(report)
}

pub fn builtin_named_cones(g: usize, include_e7: bool) -> Result<Vec<NamedCone>> {
    builtin_domains(g, include_e7)?
        .into_iter()
        .map(|d| {
            Ok(NamedCone {
                cone: d.cone()?,
                name: d.name,
            })
        })
        .collect()
}

/// Outcome of checking the smoothness statements on the built-in domains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub g: usize,
    pub scope: String,
    pub faces_checked: usize,
    /// Orbit counts per dimension.
    pub orbit_counts: BTreeMap<usize, usize>,
    /// Non-simplicial orbits of dimension 10 (only D4 at `g = 4`).
    pub non_simplicial_dim10: Vec<VectorConfig>,
    /// Spanning faces of dimension `g`, `g+1` or `g+2` that were checked.
    pub spanning_small_faces: usize,
}

impl TheoremReport {
    pub fn to_json(&self) -> Value {
        let counts: Map<String, Value> = self
            .orbit_counts
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
            .collect();
        json!({
            "g": self.g.to_string(),
            "scope": self.scope,
            "faces_checked": self.faces_checked.to_string(),
            "orbit_counts": Value::Object(counts),
            "non_simplicial_dim10": self
                .non_simplicial_dim10
                .iter()
                .map(|c| c.pairs().iter().map(vec_json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "spanning_small_faces": self.spanning_small_faces.to_string(),
        })
    }
}

fn violation(claim: &str, face: &VectorConfig) -> Error {
    Error::ClaimViolated {
        claim: claim.to_string(),
        face: pairs_label(face),
    }
}

/// Checks on every face of the built-in perfect domains for `g`:
/// (a) faces of dimension at most 9 are basic; (b) faces of dimension 10
/// are simplicial except the D4 cone; (c) faces spanning `R^g` with
/// dimension `g`, `g+1` or `g+2` are simplicial.
pub fn verify_theorems(g: usize) -> Result<TheoremReport> {
    verify_theorems_on(g, &builtin_named_cones(g, false)?)
}

pub fn verify_theorems_on(g: usize, domains: &[NamedCone]) -> Result<TheoremReport> {
    if !(2..=4).contains(&g) {
        return Err(Error::NoBuiltinDomains(g));
    }
    let top = sym2_dim(g);
    let mut faces_checked = 0;
    let mut spanning_small_faces = 0;
    for d in domains {
        let faces = d.cone.enumerate_faces(1..=top);
        faces_checked += faces.len();
        let results = faces
            .par_iter()
            .map(|face| -> Result<bool> {
                let config = face.config(&d.cone);
                let cone = face.cone(&d.cone);
                let simplicial = cone.is_simplicial();
                if face.dimension <= 9 && !cone.is_basic() {
                    return Err(violation("faces of dimension at most 9 are basic", &config));
                }
                let small = (g..=g + 2).contains(&face.dimension) && config.spans();
                if small && !simplicial {
                    return Err(violation(
                        "spanning faces of dimension g, g+1, g+2 are simplicial",
                        &config,
                    ));
                }
                Ok(small)
            })
            .collect::<Result<Vec<_>>>()?;
        spanning_small_faces += results.into_iter().filter(|&s| s).count();
    }
    let report = classify_faces(domains, 1..=top)?;
    let mut non_simplicial_dim10 = Vec::new();
    if let Some(ten) = report.dims.get(&10) {
        for o in &ten.orbits {
            if !o.simplicial {
                non_simplicial_dim10.push(o.vectors.clone());
            }
        }
    }
    let expected = if g == 4 {
        let d4 = crate::domains::by_name("D4")
            .expect("built in")
            .minimal_vectors()?;
        vec![d4]
    } else {
        Vec::new()
    };
    let matches = non_simplicial_dim10.len() == expected.len()
        && non_simplicial_dim10
            .iter()
            .zip(&expected)
            .all(|(a, b)| crate::equiv::are_equivalent(a, b).is_ok_and(|w| w.is_some()));
    if !matches {
        let face = non_simplicial_dim10
            .first()
            .cloned()
            .unwrap_or_else(|| expected[0].clone());
        return Err(violation(
            "the only non-simplicial cone of dimension 10 is the D4 cone",
            &face,
        ));
    }
    Ok(TheoremReport {
        g,
        scope: format!(
            "all faces of the built-in perfect domains for g = {g}; \
             the statements for larger g are not checked"
        ),
        faces_checked,
        orbit_counts: report.dims.iter().map(|(k, v)| (*k, v.count())).collect(),
        non_simplicial_dim10,
        spanning_small_faces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::IntMatrix;

    fn cfg(g: usize, vs: &[&[i64]]) -> VectorConfig {
        VectorConfig::from_i64(g, vs).unwrap()
    }

    fn base(g: usize, vs: &[&[i64]]) -> BaseSystem {
        BaseSystem::new(cfg(g, vs)).unwrap()
    }

    /// Every primitive sign-canonical vector in a box satisfying the
    /// determinant bounds, by direct substitution.
    fn brute_candidates(b: &BaseSystem, radius: i64) -> Vec<IntVec> {
        let g = b.g();
        let side = (2 * radius + 1) as usize;
        let rows: Vec<Vec<BigInt>> = b.vectors().pairs().iter().map(|v| v.0.clone()).collect();
        let mut out = Vec::new();
        for code in 0..side.pow(g as u32) {
            let mut c = code;
            let x: Vec<i64> = (0..g)
                .map(|_| {
                    let d = (c % side) as i64 - radius;
                    c /= side;
                    d
                })
                .collect();
            let v = IntVec::from_i64(&x);
            if v.is_zero()
                || !v.is_sign_canonical()
                || !v.is_primitive()
                || b.vectors().contains(&v)
            {
                continue;
            }
            let ok = (0..g).all(|j| {
                let mut r = rows.clone();
                r[j] = v.0.clone();
                IntMatrix::from_rows(r).unwrap().det().unwrap().abs() <= *b.index()
            });
            if ok {
                out.push(v);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn base_validation() {
        assert_eq!(BaseSystem::standard(3).index(), &BigInt::from(1));
        assert_eq!(base(2, &[&[1, 1], &[1, -1]]).index(), &BigInt::from(2));
        assert_eq!(
            BaseSystem::new(cfg(2, &[&[1, 0]])),
            Err(Error::ShapeMismatch {
                expected: 2,
                got: 1
            })
        );
        assert_eq!(
            BaseSystem::new(cfg(2, &[&[1, 1], &[2, 1], &[1, 2]]).subset(&[0, 0])).err(),
            Some(Error::RankDeficient)
        );
    }

    #[test]
    fn candidate_examples() {
        assert_eq!(
            extension_candidates(&BaseSystem::standard(2)),
            vec![IntVec::from_i64(&[1, -1]), IntVec::from_i64(&[1, 1])]
        );
        // pairs of {-1,0,1}^3 other than the axes
        assert_eq!(extension_candidates(&BaseSystem::standard(3)).len(), 10);
        let toy = base(2, &[&[1, 1], &[1, -1]]);
        assert_eq!(extension_candidates(&toy), brute_candidates(&toy, 4));
    }

    #[test]
    fn candidates_match_box_enumeration() {
        let bases = [
            BaseSystem::standard(2),
            base(2, &[&[1, 0], &[1, 3]]),
            BaseSystem::standard(3),
            base(3, &[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]),
        ];
        for b in &bases {
            let adj = b.vectors().vector_matrix().unwrap().adjugate().unwrap();
            let max_adj = adj
                .to_rows()
                .concat()
                .iter()
                .map(|x| x.abs())
                .max()
                .unwrap();
            let radius: i64 = (b.index() * max_adj).try_into().unwrap();
            assert_eq!(
                extension_candidates(b),
                brute_candidates(b, radius),
                "{:?}",
                b
            );
        }
    }

    #[test]
    fn extension_in_dimension_two_gives_a2() {
        let out = extend_and_classify(&[BaseSystem::standard(2)], 3).unwrap();
        let orbits = &out.report.dims[&3].orbits;
        assert_eq!(orbits.len(), 1);
        let a2 = cfg(2, &[&[1, 0], &[0, 1], &[1, 1]]);
        assert!(crate::equiv::are_equivalent(&orbits[0].vectors, &a2)
            .unwrap()
            .is_some());
        assert!(orbits[0].basic && orbits[0].simplicial);
    }

    #[test]
    fn non_realizable_base_is_rejected() {
        let toy = base(2, &[&[1, 1], &[1, -1]]);
        let out = extend_and_classify(std::slice::from_ref(&toy), 3).unwrap();
        assert_eq!(out.rejected_bases, vec![toy]);
        assert_eq!(out.report.dims[&3].count(), 0);
    }

    #[test]
    fn only_next_dimension_is_supported() {
        assert_eq!(
            extend_and_classify(&[BaseSystem::standard(2)], 4),
            Err(Error::UnsupportedTarget { g: 2, target: 4 })
        );
    }

    #[test]
    fn a2_faces() {
        let report = classify_faces(&builtin_named_cones(2, false).unwrap(), 1..=3).unwrap();
        for dim in 1..=3 {
            let d = &report.dims[&dim];
            assert_eq!(d.count(), 1);
            assert!(d.orbits[0].basic);
        }
    }

    #[test]
    fn report_json_round_trip() {
        let report = classify_faces(&builtin_named_cones(3, false).unwrap(), 1..=6).unwrap();
        let text = report.to_json_string();
        assert_eq!(OrbitReport::from_json(&text).unwrap(), report);
        for d in report.dims.values() {
            for o in &d.orbits {
                assert!(o.recheck().unwrap());
            }
        }
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["g"], "3");
        assert!(v["dims"]["6"]["count"].is_string());
    }

    #[test]
    fn theorems_for_small_g() {
        for g in [2, 3] {
            let r = verify_theorems(g).unwrap();
            assert!(r.non_simplicial_dim10.is_empty());
            assert!(r.faces_checked > 0);
        }
        assert_eq!(verify_theorems(5), Err(Error::NoBuiltinDomains(5)));
    }
}
