//! Quadratic forms, rank-1 forms and vector configurations.
//!
//! `Sym^2(Z^g)` is the lattice of symmetric integer matrices with basis
//! `{E_ii} ∪ {E_ij + E_ji : i < j}`. Coordinates are ordered diagonal first,
//! then the upper triangle row by row: `(Q_11, ..., Q_gg, Q_12, Q_13, ...,
//! Q_{g-1,g})`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlinalg::{smith_normal_form, IntMatrix};

pub type Rat = BigRational;

/// Integer coordinate vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVec(pub Vec<BigInt>);

impl IntVec {
    pub fn from_i64(xs: &[i64]) -> Self {
        IntVec(xs.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(g: usize) -> Self {
        IntVec(vec![BigInt::zero(); g])
    }

    pub fn unit(g: usize, i: usize) -> Self {
        let mut v = Self::zero(g);
        v.0[i] = BigInt::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    pub fn dot(&self, other: &IntVec) -> BigInt {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn neg(&self) -> IntVec {
        IntVec(self.0.iter().map(|x| -x).collect())
    }

    /// First nonzero coordinate is positive.
    pub fn is_sign_canonical(&self) -> bool {
        self.0
            .iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.is_positive())
    }

    /// The representative of `±self` whose first nonzero coordinate is positive.
    pub fn sign_canonical(&self) -> IntVec {
        if self.is_sign_canonical() || self.is_zero() {
            self.clone()
        } else {
            self.neg()
        }
    }

    pub fn as_slice(&self) -> &[BigInt] {
        &self.0
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Divides out the gcd and normalizes the sign.
pub fn reduce_primitive(v: &IntVec) -> Result<IntVec> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let c = v.content();
    Ok(IntVec(v.0.iter().map(|x| x / &c).collect()).sign_canonical())
}

/// Symmetric `g x g` matrix; `BigInt` entries by default, `BigRational` for
/// witnesses and rational Gram matrices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymForm<T = BigInt> {
    g: usize,
    entries: Vec<T>,
}

pub type RatForm = SymForm<Rat>;

impl<T> SymForm<T>
where
    T: Clone + Num + From<BigInt>,
{
    /// Row-major entries; rejects asymmetric input.
    pub fn new(g: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != g * g {
            return Err(Error::ShapeMismatch {
                expected: g * g,
                got: entries.len(),
            });
        }
        for i in 0..g {
            for j in i + 1..g {
                if entries[i * g + j] != entries[j * g + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { g, entries })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let g = rows.len();
        let mut entries = Vec::with_capacity(g * g);
        for row in rows {
            if row.len() != g {
                return Err(Error::ShapeMismatch {
                    expected: g,
                    got: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(g, entries)
    }

    pub fn zero(g: usize) -> Self {
        Self {
            g,
            entries: vec![T::zero(); g * g],
        }
    }

    pub fn identity(g: usize) -> Self {
        let mut f = Self::zero(g);
        for i in 0..g {
            f.entries[i * g + i] = T::one();
        }
        f
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.g + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.g).map(<[T]>::to_vec).collect()
    }

    /// `x^t Q x`.
    pub fn evaluate(&self, x: &IntVec) -> Result<T> {
        if x.len() != self.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x.as_slice()))
    }

    pub(crate) fn eval_unchecked(&self, x: &[BigInt]) -> T {
        let g = self.g;
        let mut acc = T::zero();
        for i in 0..g {
            if x[i].is_zero() {
                continue;
            }
            let xi = T::from(x[i].clone());
            acc = acc + self.entries[i * g + i].clone() * xi.clone() * xi.clone();
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                if xj.is_zero() {
                    continue;
                }
                let two = T::one() + T::one();
                acc =
                    acc + two * self.entries[i * g + j].clone() * xi.clone() * T::from(xj.clone());
            }
        }
        acc
    }

    /// Bilinear form `x^t Q y`.
    pub fn bilinear(&self, x: &IntVec, y: &IntVec) -> T {
        let g = self.g;
        let mut acc = T::zero();
        for i in 0..g {
            if x.0[i].is_zero() {
                continue;
            }
            let mut row = T::zero();
            for j in 0..g {
                if !y.0[j].is_zero() {
                    row = row + self.entries[i * g + j].clone() * T::from(y.0[j].clone());
                }
            }
            acc = acc + T::from(x.0[i].clone()) * row;
        }
        acc
    }

    pub fn sym2_coords(&self) -> Vec<T> {
        let g = self.g;
        let mut out: Vec<T> = (0..g).map(|i| self.entries[i * g + i].clone()).collect();
        for i in 0..g {
            for j in i + 1..g {
                out.push(self.entries[i * g + j].clone());
            }
        }
        out
    }

    pub fn from_sym2_coords(g: usize, coords: &[T]) -> Result<Self> {
        if coords.len() != sym2_dim(g) {
            return Err(Error::ShapeMismatch {
                expected: sym2_dim(g),
                got: coords.len(),
            });
        }
        let mut f = Self::zero(g);
        for (i, c) in coords[..g].iter().enumerate() {
            f.entries[i * g + i] = c.clone();
        }
        let mut k = g;
        for i in 0..g {
            for j in i + 1..g {
                f.entries[i * g + j] = coords[k].clone();
                f.entries[j * g + i] = coords[k].clone();
                k += 1;
            }
        }
        Ok(f)
    }

    /// Embeds into the top-left block of a `big_g x big_g` zero matrix.
    pub fn pad(&self, big_g: usize) -> Result<Self> {
        if big_g < self.g {
            return Err(Error::PadTooSmall {
                from: self.g,
                to: big_g,
            });
        }
        let mut f = Self::zero(big_g);
        for i in 0..self.g {
            for j in 0..self.g {
                f.entries[i * big_g + j] = self.entries[i * self.g + j].clone();
            }
        }
        Ok(f)
    }

    pub fn scale(&self, factor: &T) -> Self {
        Self {
            g: self.g,
            entries: self
                .entries
                .iter()
                .map(|x| x.clone() * factor.clone())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }
}

impl SymForm<BigInt> {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn to_rational(&self) -> RatForm {
        SymForm {
            g: self.g,
            entries: self
                .entries
                .iter()
                .map(|x| Rat::from_integer(x.clone()))
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> IntMatrix {
        IntMatrix::new(self.g, self.g, self.entries.clone()).expect("nonempty form")
    }

    /// `U Q U^t`.
    pub fn congruent(&self, u: &IntMatrix) -> SymForm {
        let m = &(u * &self.to_matrix()) * &u.transpose();
        SymForm::new(m.rows(), m.to_rows().concat()).expect("congruence preserves symmetry")
    }
}

impl SymForm<Rat> {
    /// Integer form when every entry is integral.
    pub fn to_integral(&self) -> Option<SymForm> {
        if self.entries.iter().all(|x| x.is_integer()) {
            Some(SymForm {
                g: self.g,
                entries: self.entries.iter().map(|x| x.to_integer()).collect(),
            })
        } else {
            None
        }
    }

    /// `M^t Q M` for an integer matrix `M`, i.e. the form `x -> Q[M x]`.
    pub fn pullback(&self, m: &IntMatrix) -> Result<RatForm> {
        if m.rows() != self.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                got: m.rows(),
            });
        }
        let n = m.cols();
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Rat::zero();
                for i in 0..self.g {
                    if m[(i, a)].is_zero() {
                        continue;
                    }
                    for j in 0..self.g {
                        if m[(j, b)].is_zero() {
                            continue;
                        }
                        acc += &self.entries[i * self.g + j]
                            * Rat::from_integer(&m[(i, a)] * &m[(j, b)]);
                    }
                }
                out.push(acc);
            }
        }
        RatForm::new(n, out)
    }
}

impl<T: fmt::Display> fmt::Display for SymForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.g) {
            let parts: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

pub fn sym2_dim(g: usize) -> usize {
    g * (g + 1) / 2
}

/// `p(v) = v v^t`.
pub fn rank1_form(v: &IntVec) -> Result<SymForm> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let g = v.len();
    let mut entries = Vec::with_capacity(g * g);
    for a in &v.0 {
        for b in &v.0 {
            entries.push(a * b);
        }
    }
    SymForm::new(g, entries)
}

/// Coordinates of `p(v)` without materializing the matrix.
pub fn rank1_coords(v: &IntVec) -> Vec<BigInt> {
    let g = v.len();
    let mut out: Vec<BigInt> = v.0.iter().map(|x| x * x).collect();
    for i in 0..g {
        for j in i + 1..g {
            out.push(&v.0[i] * &v.0[j]);
        }
    }
    out
}

pub fn sym2_coords(q: &SymForm) -> Vec<BigInt> {
    q.sym2_coords()
}

pub fn evaluate<T: Clone + Num + From<BigInt>>(q: &SymForm<T>, x: &IntVec) -> Result<T> {
    q.evaluate(x)
}

/// A set of `±v` pairs of primitive vectors, one stored representative per
/// pair with its first nonzero coordinate positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorConfig {
    g: usize,
    pairs: Vec<IntVec>,
}

impl VectorConfig {
    /// Validates primitivity and distinctness; normalizes signs, keeps order.
    pub fn new(g: usize, vectors: Vec<IntVec>) -> Result<Self> {
        let mut pairs: Vec<IntVec> = Vec::with_capacity(vectors.len());
        for (index, v) in vectors.into_iter().enumerate() {
            if v.len() != g {
                return Err(Error::DimensionMismatch {
                    expected: g,
                    got: v.len(),
                });
            }
            if v.is_zero() {
                return Err(Error::ZeroVector);
            }
            if !v.is_primitive() {
                return Err(Error::NotPrimitive { index });
            }
            let v = v.sign_canonical();
            if let Some(first) = pairs.iter().position(|w| *w == v) {
                return Err(Error::ProportionalPair {
                    first,
                    second: index,
                });
            }
            pairs.push(v);
        }
        Ok(Self { g, pairs })
    }

    /// Like [`VectorConfig::new`] but divides out content first.
    pub fn from_reduced(g: usize, vectors: Vec<IntVec>) -> Result<Self> {
        let reduced = vectors
            .iter()
            .map(|v| {
                if v.len() != g {
                    Err(Error::DimensionMismatch {
                        expected: g,
                        got: v.len(),
                    })
                } else {
                    reduce_primitive(v)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, reduced)
    }

    pub fn from_i64(g: usize, vectors: &[&[i64]]) -> Result<Self> {
        Self::new(g, vectors.iter().map(|v| IntVec::from_i64(v)).collect())
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[IntVec] {
        &self.pairs
    }

    pub fn contains(&self, v: &IntVec) -> bool {
        let c = v.sign_canonical();
        self.pairs.contains(&c)
    }

    /// Pairs sorted lexicographically.
    pub fn canonical(&self) -> VectorConfig {
        let mut pairs = self.pairs.clone();
        pairs.sort();
        VectorConfig { g: self.g, pairs }
    }

    pub fn subset(&self, indices: &[usize]) -> VectorConfig {
        VectorConfig {
            g: self.g,
            pairs: indices.iter().map(|&i| self.pairs[i].clone()).collect(),
        }
    }

    pub fn with(&self, v: IntVec) -> Result<VectorConfig> {
        let mut vs = self.pairs.clone();
        vs.push(v);
        VectorConfig::new(self.g, vs)
    }

    /// Stacked `sym2` coordinates of the rank-1 forms, one row per pair.
    pub fn coordinate_matrix(&self) -> Result<IntMatrix> {
        IntMatrix::from_rows(self.pairs.iter().map(rank1_coords).collect())
    }

    /// The vectors as the rows of an `M x g` matrix.
    pub fn vector_matrix(&self) -> Result<IntMatrix> {
        IntMatrix::from_rows(self.pairs.iter().map(|v| v.0.clone()).collect())
    }

    /// Rank of the vectors in `Q^g`.
    pub fn span_rank(&self) -> usize {
        self.vector_matrix().map_or(0, |m| m.rank())
    }

    pub fn spans(&self) -> bool {
        self.span_rank() == self.g
    }

    /// `sum_i p(v_i)`.
    pub fn characteristic_form(&self) -> SymForm {
        let g = self.g;
        let mut entries = vec![BigInt::zero(); g * g];
        for v in &self.pairs {
            for i in 0..g {
                if v.0[i].is_zero() {
                    continue;
                }
                for j in 0..g {
                    entries[i * g + j] += &v.0[i] * &v.0[j];
                }
            }
        }
        SymForm { g, entries }
    }

    /// Image under `v -> U v`.
    pub fn transform(&self, u: &IntMatrix) -> Result<VectorConfig> {
        if u.cols() != self.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                got: u.cols(),
            });
        }
        VectorConfig::from_reduced(
            u.rows(),
            self.pairs.iter().map(|v| IntVec(u.apply(&v.0))).collect(),
        )
    }

    /// True when both hold the same set of pairs.
    pub fn same_pairs(&self, other: &VectorConfig) -> bool {
        self.g == other.g && self.canonical().pairs == other.canonical().pairs
    }

    /// Text form: header `g M`, then one vector per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.g, self.pairs.len());
        for v in &self.pairs {
            s.push_str(&v.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<VectorConfig> {
        let mut lines = data_lines(text);
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "missing header `g M`".into(),
        })?;
        let header = parse_ints(hline, header)?;
        let [g, m] = &header[..] else {
            return Err(Error::Parse {
                line: hline,
                message: "header must be `g M`".into(),
            });
        };
        let (g, m) = (to_count(hline, g)?, to_count(hline, m)?);
        let mut vectors = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, body) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("expected {m} vectors, found {}", vectors.len()),
            })?;
            let v = parse_ints(line, body)?;
            if v.len() != g {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {g} coordinates, found {}", v.len()),
                });
            }
            let v = IntVec(v);
            if v.is_zero() {
                return Err(Error::Parse {
                    line,
                    message: "zero vector".into(),
                });
            }
            vectors.push(v);
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse {
                line,
                message: "trailing data after the declared vectors".into(),
            });
        }
        VectorConfig::from_reduced(g, vectors)
    }
}

impl fmt::Display for VectorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|v| format!("({v})")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl FromStr for VectorConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VectorConfig::parse(s)
    }
}

/// Non-blank, non-comment lines with 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_ints(line: usize, body: &str) -> Result<Vec<BigInt>> {
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<BigInt>().map_err(|_| Error::Parse {
                line,
                message: format!("not an integer: `{tok}`"),
            })
        })
        .collect()
}

pub(crate) fn to_count(line: usize, x: &BigInt) -> Result<usize> {
    usize::try_from(x).map_err(|_| Error::Parse {
        line,
        message: format!("expected a nonnegative count, found {x}"),
    })
}

/// Coordinates of a configuration inside its saturation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Saturation {
    /// Rank `d` of the configuration.
    pub dim: usize,
    /// Unimodular `g x g` matrix; its first `d` columns are a basis of the
    /// saturated lattice `(L ⊗ R) ∩ Z^g`.
    pub basis: IntMatrix,
    /// Inverse of `basis`; the first `d` rows give saturated coordinates.
    pub inverse: IntMatrix,
}

impl Saturation {
    /// Maps a vector in saturated coordinates back to `Z^g`.
    pub fn embed(&self, y: &IntVec) -> IntVec {
        let g = self.basis.rows();
        let mut out = vec![BigInt::zero(); g];
        for (k, yk) in y.0.iter().enumerate() {
            if yk.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += &self.basis[(i, k)] * yk;
            }
        }
        IntVec(out)
    }

    /// `g x d` embedding matrix (the first `d` columns of `basis`).
    pub fn embedding(&self) -> IntMatrix {
        let g = self.basis.rows();
        let mut m = IntMatrix::zeros(g, self.dim.max(1));
        for i in 0..g {
            for k in 0..self.dim {
                m[(i, k)] = self.basis[(i, k)].clone();
            }
        }
        m
    }
}

/// Rewrites a configuration in a basis of its saturated span, so that the
/// result spans `Q^d`.
pub fn saturate(config: &VectorConfig) -> Result<(VectorConfig, Saturation)> {
    if config.is_empty() {
        return Err(Error::EmptyConfig);
    }
    let a = config.vector_matrix()?;
    // rows of right^{-1} restricted to the first d span the saturation
    let snf = smith_normal_form(&a);
    let d = snf.rank();
    let right = snf.right_transform;
    let basis = right.unimodular_inverse()?.transpose();
    let inverse = right.transpose();
    let mut vectors = Vec::with_capacity(config.len());
    for v in config.pairs() {
        let y = inverse.apply(&v.0);
        debug_assert!(y[d..].iter().all(Zero::is_zero));
        vectors.push(IntVec(y[..d].to_vec()));
    }
    let sat = VectorConfig::new(d, vectors)?;
    Ok((
        sat,
        Saturation {
            dim: d,
            basis,
            inverse,
        },
    ))
}
