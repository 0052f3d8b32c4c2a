//! The reproduction suite run by `perfcone verify`: ten numbered checks,
//! each reporting pass/fail with a one-line detail.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::classify::{
    builtin_named_cones, classify_faces, extend_and_classify, verify_theorems, BaseSystem,
    OrbitReport,
};
use crate::cone::RayCone;
use crate::domains::{self, by_name, d4_gram};
use crate::equiv::are_equivalent;
use crate::error::{Error, Result};
use crate::exactlinalg::{IntMatrix, Rat};
use crate::forms::{IntVec, RatForm, SymForm, VectorConfig};
use crate::minvec::{is_positive_definite, shortest_vectors};
use crate::realize::is_perfect_cone_config;
use crate::voronoi2::second_voronoi_examples;

/// Face orbit counts at `g = 4` for dimensions 1 through 10, recorded on the
/// first verified run.
pub const G4_ORBIT_COUNTS: [usize; 10] = [1, 1, 2, 3, 4, 5, 4, 2, 2, 2];

pub const CRITERIA: [(usize, &str); 10] = [
    (1, "D4 cone"),
    (2, "A2/A3 domains"),
    (3, "g=4 face orbits"),
    (4, "E7* cone"),
    (5, "toy cone"),
    (6, "second Voronoi examples"),
    (7, "spanning small faces are simplicial"),
    (8, "pipeline cross-oracle"),
    (9, "oracle equivalences"),
    (10, "thread-count determinism"),
];

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Gram matrix used by the D4 check; replaced only by negative controls.
    pub d4_gram: RatForm,
    /// Pool size for the parallel half of the determinism check.
    pub threads: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            d4_gram: d4_gram(),
            threads: 4,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id.to_string(),
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
        })
    }
}

/// Outcome of one check: `Ok(detail)` on pass, `Err(detail)` on fail.
type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn run_criterion(id: usize, opts: &CheckOptions) -> Result<CriterionResult> {
    let Some(&(_, name)) = CRITERIA.iter().find(|(i, _)| *i == id) else {
        return Err(Error::Invalid(format!("no criterion {id}")));
    };
    let start = Instant::now();
    let outcome = match id {
        1 => d4_cone(&opts.d4_gram),
        2 => small_domains(),
        3 => g4_orbits(),
        4 => e7_dual(),
        5 => toy_cone(),
        6 => second_voronoi(),
        7 => spanning_faces(),
        8 => pipeline(),
        9 => oracles(opts.seed),
        _ => determinism(opts.threads),
    };
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Ok(CriterionResult {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    })
}

pub fn run_all(opts: &CheckOptions) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, opts).expect("known id"))
        .collect()
}

fn d4_cone(gram: &RatForm) -> Outcome {
    let pairs = lib(shortest_vectors(gram))?.pairs;
    let cone = lib(RayCone::new(pairs))?;
    let got = (
        cone.len(),
        cone.dimension(),
        cone.is_simplicial(),
        cone.is_basic(),
    );
    ensure(got == (12, 10, false, false), || {
        format!(
            "expected 12 pairs, dimension 10, not simplicial, not basic; \
             got {} pairs, dimension {}, simplicial {}, basic {}",
            got.0, got.1, got.2, got.3
        )
    })?;
    Ok("12 pairs, dimension 10, neither simplicial nor basic".into())
}

fn small_domains() -> Outcome {
    let mut faces = 0;
    for (name, dim) in [("A2", 3), ("A3", 6)] {
        let cone = lib(by_name(name).expect("built in").cone())?;
        ensure(cone.dimension() == dim, || {
            format!("{name}: dimension {} instead of {dim}", cone.dimension())
        })?;
        for face in cone.enumerate_faces(1..=dim) {
            faces += 1;
            let fc = face.cone(&cone);
            ensure(fc.is_basic(), || {
                format!("{name}: face {} is not basic", face.config(&cone))
            })?;
        }
    }
    Ok(format!("dimensions 3 and 6; all {faces} faces basic"))
}

fn g4_orbits() -> Outcome {
    let report = lib(verify_theorems(4))?;
    let counts: Vec<usize> = (1..=10)
        .map(|d| report.orbit_counts.get(&d).copied().unwrap_or(0))
        .collect();
    ensure(counts == G4_ORBIT_COUNTS, || {
        format!("orbit counts {counts:?} differ from recorded {G4_ORBIT_COUNTS:?}")
    })?;
    Ok(format!(
        "{} faces; orbits per dimension {counts:?}; dims <= 9 basic; \
         only D4 is non-simplicial in dimension 10",
        report.faces_checked
    ))
}

fn e7_dual() -> Outcome {
    let res = lib(shortest_vectors(&domains::e7_dual_gram()))?;
    let cone = lib(RayCone::new(res.pairs))?;
    let index = cone.sublattice_index();
    ensure(
        cone.len() == 28
            && cone.dimension() == 28
            && cone.is_simplicial()
            && !cone.is_basic()
            && index == BigInt::from(384),
        || {
            format!(
                "pairs {}, dimension {}, simplicial {}, basic {}, index {index}",
                cone.len(),
                cone.dimension(),
                cone.is_simplicial(),
                cone.is_basic()
            )
        },
    )?;
    Ok("28 pairs, dimension 28, simplicial, not basic, index 384".into())
}

fn toy_cone() -> Outcome {
    let config = lib(VectorConfig::from_i64(2, &[&[1, 1], &[1, -1]]))?;
    let cone = lib(RayCone::new(config.clone()))?;
    let index = cone.sublattice_index();
    ensure(
        cone.is_simplicial() && !cone.is_basic() && index == BigInt::from(2),
        || {
            format!(
                "simplicial {}, basic {}, index {index}",
                cone.is_simplicial(),
                cone.is_basic()
            )
        },
    )?;
    let verdict = lib(is_perfect_cone_config(&config))?;
    ensure(!verdict.realizable, || "reported realizable".into())?;
    Ok("simplicial, not basic, index 2, not realizable".into())
}

fn second_voronoi() -> Outcome {
    for (k, cone) in second_voronoi_examples().iter().enumerate() {
        for big_g in [5, 6, 7] {
            let c = lib(cone.pad_to(big_g))?;
            ensure(
                c.len() == 4 && c.cone_dimension() == 3 && !c.is_simplicial(),
                || {
                    format!(
                        "cone {} at G={big_g}: {} generators, dimension {}",
                        k + 1,
                        c.len(),
                        c.cone_dimension()
                    )
                },
            )?;
        }
    }
    Ok("both cones: 4 generators, dimension 3, non-simplicial at G = 5, 6, 7".into())
}

fn spanning_faces() -> Outcome {
    let mut checked = 0;
    for g in 2..=4 {
        for d in lib(builtin_named_cones(g, false))? {
            for face in d.cone.enumerate_faces(g..=g + 2) {
                let config = face.config(&d.cone);
                if !config.spans() {
                    continue;
                }
                checked += 1;
                ensure(face.cone(&d.cone).is_simplicial(), || {
                    format!("{}: face {config} is not simplicial", d.name)
                })?;
            }
        }
    }
    Ok(format!(
        "{checked} spanning faces of dimension g..g+2, all simplicial"
    ))
}

fn equivalent(a: &VectorConfig, b: &VectorConfig) -> std::result::Result<bool, String> {
    match lib(are_equivalent(a, b))? {
        Some(w) => {
            ensure(w.verify(a, b), || "witness failed substitution".into())?;
            Ok(true)
        }
        None => Ok(false),
    }
}

fn pipeline() -> Outcome {
    let out2 = lib(extend_and_classify(&[BaseSystem::standard(2)], 3))?;
    let top = out2
        .report
        .dims
        .get(&3)
        .map(|d| d.orbits.clone())
        .unwrap_or_default();
    let a2 = lib(by_name("A2").expect("built in").minimal_vectors())?;
    ensure(top.len() == 1, || {
        format!("g=2: {} orbits instead of 1", top.len())
    })?;
    ensure(equivalent(&top[0].vectors, &a2)?, || {
        "g=2: orbit is not the A2 cone".into()
    })?;

    let bases = [
        BaseSystem::standard(3),
        lib(BaseSystem::new(lib(VectorConfig::from_i64(
            3,
            &[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1]],
        ))?))?,
    ];
    let out3 = lib(extend_and_classify(&bases, 4))?;
    let found: Vec<VectorConfig> = out3
        .report
        .dims
        .get(&4)
        .map(|d| d.orbits.iter().map(|o| o.vectors.clone()).collect())
        .unwrap_or_default();
    let faces = lib(classify_faces(&lib(builtin_named_cones(3, false))?, 4..=4))?;
    let expected: Vec<VectorConfig> = faces.dims[&4]
        .orbits
        .iter()
        .filter(|o| o.simplicial)
        .map(|o| o.vectors.clone())
        .collect();
    ensure(found.len() == expected.len(), || {
        format!(
            "g=3: pipeline gives {} orbits, A3 has {} simplicial 4-faces",
            found.len(),
            expected.len()
        )
    })?;
    for a in &found {
        let mut hits = 0;
        for b in &expected {
            if equivalent(a, b)? {
                hits += 1;
            }
        }
        ensure(hits == 1, || {
            format!("g=3: orbit {a} matches {hits} A3 faces")
        })?;
    }
    Ok(format!(
        "g=2: one orbit, the A2 cone; g=3: {} orbits matching the A3 4-faces",
        found.len()
    ))
}

#[allow(clippy::needless_range_loop)]
fn random_pd_form(rng: &mut ChaCha8Rng, g: usize) -> SymForm {
    loop {
        let mut rows = vec![vec![BigInt::zero(); g]; g];
        for i in 0..g {
            rows[i][i] = BigInt::from(rng.gen_range(1..=10));
            for j in i + 1..g {
                let x = BigInt::from(rng.gen_range(-10..=10));
                rows[i][j] = x.clone();
                rows[j][i] = x;
            }
        }
        let q = SymForm::from_rows(rows).expect("symmetric");
        if is_positive_definite(&q.to_rational()) {
            return q;
        }
    }
}

/// Largest `k` with `k^2 * den <= num`.
fn isqrt_ratio(num: &BigInt, den: &BigInt) -> i64 {
    let mut k = 0i64;
    while BigInt::from((k + 1) * (k + 1)) * den <= *num {
        k += 1;
    }
    k
}

/// Minimum and sign-canonical minimal vectors by scanning a box that
/// contains every `x` with `Q[x] <= min_i Q_ii`.
fn box_minimum(q: &SymForm) -> Option<(BigInt, Vec<IntVec>)> {
    let g = q.g();
    let m = q.to_matrix();
    let det = m.det().ok()?;
    let adj = m.adjugate().ok()?;
    let bound = (0..g).map(|i| q.get(i, i).clone()).min()?;
    let radius: Vec<i64> = (0..g)
        .map(|i| isqrt_ratio(&(&bound * &adj[(i, i)]), &det))
        .collect();
    let cells: u64 = radius.iter().map(|r| (2 * r + 1) as u64).product();
    if cells > 400_000 {
        return None;
    }
    let mut best: Option<BigInt> = None;
    let mut hits: Vec<IntVec> = Vec::new();
    let mut x: Vec<i64> = radius.iter().map(|r| -r).collect();
    loop {
        let v = IntVec::from_i64(&x);
        if !v.is_zero() && v.is_sign_canonical() {
            let val = q.evaluate(&v).expect("dimension matches");
            match best.as_ref().map(|b| val.cmp(b)) {
                None | Some(std::cmp::Ordering::Less) => {
                    best = Some(val);
                    hits = vec![v];
                }
                Some(std::cmp::Ordering::Equal) => hits.push(v),
                _ => {}
            }
        }
        let mut i = 0;
        while i < g && x[i] == radius[i] {
            x[i] = -radius[i];
            i += 1;
        }
        if i == g {
            break;
        }
        x[i] += 1;
    }
    hits.sort();
    Some((best?, hits))
}

fn random_unimodular(rng: &mut ChaCha8Rng, g: usize) -> IntMatrix {
    let mut u = IntMatrix::identity(g);
    for _ in 0..3 * g {
        let i = rng.gen_range(0..g);
        let j = rng.gen_range(0..g);
        if i == j {
            continue;
        }
        let c = BigInt::from(rng.gen_range(-2..=2));
        for k in 0..g {
            let add = &c * &u[(j, k)];
            u[(i, k)] += add;
        }
    }
    u
}

fn oracles(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut forms = 0;
    let mut skipped = 0;
    while forms < 50 {
        let g = rng.gen_range(1..=4);
        let q = random_pd_form(&mut rng, g);
        let Some((min, mut expect)) = box_minimum(&q) else {
            skipped += 1;
            continue;
        };
        forms += 1;
        let res = lib(shortest_vectors(&q.to_rational()))?;
        let mut got: Vec<IntVec> = res.pairs.pairs().to_vec();
        got.sort();
        expect.retain(IntVec::is_primitive);
        ensure(
            res.minimum == Rat::from_integer(min.clone()) && got == expect,
            || {
                format!(
                    "shortest_vectors disagrees with box search on {:?}",
                    q.rows()
                )
            },
        )?;
    }

    for _ in 0..100 {
        let r = rng.gen_range(1..=4);
        let c = rng.gen_range(r..=6);
        let data = (0..r * c)
            .map(|_| BigInt::from(rng.gen_range(-6..=6)))
            .collect();
        let a = lib(IntMatrix::new(r, c, data))?;
        let snf = crate::exactlinalg::smith_normal_form(&a);
        match crate::exactlinalg::maximal_minor_gcd(&a) {
            Ok(gcd) => ensure(snf.rank() == r && snf.index() == gcd, || {
                format!(
                    "minor gcd {gcd} vs divisors {:?} on {:?}",
                    snf.divisors,
                    a.to_rows()
                )
            })?,
            Err(Error::RankDeficient) => ensure(snf.rank() < r, || {
                format!("full-rank matrix {:?} reported rank deficient", a.to_rows())
            })?,
            Err(e) => return Err(e.to_string()),
        }
    }

    let mut witnesses = 0;
    let mut certificates = 0;
    for name in ["A2", "A3", "A4", "D4"] {
        let domain = by_name(name).expect("built in");
        let config = lib(domain.minimal_vectors())?;
        for _ in 0..3 {
            let u = random_unimodular(&mut rng, config.g());
            let image = lib(config.transform(&u))?;
            ensure(equivalent(&config, &image)?, || {
                format!("{name}: image under a unimodular map reported inequivalent")
            })?;
            witnesses += 1;
        }
        let cone = lib(domain.cone())?;
        for face in cone.enumerate_faces(1..=cone.dimension()) {
            ensure(face.certificate.verify(&cone), || {
                format!("{name}: certificate of face {:?} fails", face.generators)
            })?;
            certificates += 1;
        }
        let verdict = lib(is_perfect_cone_config(&config))?;
        let witness = verdict
            .witness
            .ok_or_else(|| format!("{name}: no realizing form"))?;
        let res = lib(shortest_vectors(&witness))?;
        ensure(res.pairs.same_pairs(&config), || {
            format!("{name}: realizing form has other minimal vectors")
        })?;
    }
    Ok(format!(
        "{forms} forms vs box search ({skipped} with oversized boxes redrawn), \
         100 matrices, {witnesses} equivalence witnesses, {certificates} face certificates"
    ))
}

fn classify_g4_json(threads: usize) -> std::result::Result<String, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        let cones = lib(builtin_named_cones(4, false))?;
        let report: OrbitReport = lib(classify_faces(&cones, 1..=10))?;
        Ok(report.to_json_string())
    })
}

fn determinism(threads: usize) -> Outcome {
    let n = threads.max(2);
    let one = classify_g4_json(1)?;
    let many = classify_g4_json(n)?;
    ensure(one == many, || {
        format!("JSON differs between 1 and {n} threads")
    })?;
    Ok(format!(
        "identical {}-byte reports with 1 and {n} threads",
        one.len()
    ))
}

/// Name of the first failing criterion, if any.
pub fn first_failure(results: &[CriterionResult]) -> Option<&CriterionResult> {
    results.iter().find(|r| !r.passed)
}

pub fn summary_json(results: &[CriterionResult]) -> Value {
    json!({
        "passed": results.iter().all(|r| r.passed),
        "criteria": results.iter().map(CriterionResult::to_json).collect::<Vec<_>>(),
    })
}
