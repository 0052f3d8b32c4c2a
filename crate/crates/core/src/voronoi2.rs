//! Cones spanned by arbitrary symmetric matrices, as they occur in the
//! second Voronoi decomposition, plus a text format for exchanging them.
//!
//! File format: a header `g K`, then `K` matrices of `g` rows each. Several
//! cones may follow one another. Blank lines and `#` comments are ignored.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::cone::RayCone;
use crate::error::{Error, Result};
use crate::exactlinalg::{smith_normal_form, Combinations, IntMatrix};
use crate::forms::{data_lines, parse_ints, rank1_form, to_count, SymForm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixCone {
    g: usize,
    generators: Vec<SymForm>,
}

impl MatrixCone {
    pub fn new(generators: Vec<SymForm>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::EmptyConfig);
        };
        let g = first.g();
        if let Some(bad) = generators.iter().find(|q| q.g() != g) {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: bad.g(),
            });
        }
        Ok(Self { g, generators })
    }

    /// The rank-1 generators `p(v)` of a cone of vectors.
    pub fn from_ray_cone(cone: &RayCone) -> Self {
        let generators = cone
            .generators()
            .pairs()
            .iter()
            .map(|v| rank1_form(v).expect("nonempty vector"))
            .collect();
        Self {
            g: cone.g(),
            generators,
        }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn generators(&self) -> &[SymForm] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    fn coordinate_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.generators.iter().map(SymForm::sym2_coords).collect())
            .expect("nonempty cone")
    }

    pub fn cone_dimension(&self) -> usize {
        self.coordinate_matrix().rank()
    }

    pub fn is_simplicial(&self) -> bool {
        self.cone_dimension() == self.len()
    }

    /// Independent generators whose Smith divisors are all 1.
    pub fn is_basic(&self) -> bool {
        let snf = smith_normal_form(&self.coordinate_matrix());
        snf.rank() == self.len() && snf.all_ones()
    }

    pub fn sublattice_index(&self) -> BigInt {
        smith_normal_form(&self.coordinate_matrix()).index()
    }

    /// Each generator embedded in the top-left block of a `G x G` matrix.
    pub fn pad_to(&self, big_g: usize) -> Result<MatrixCone> {
        if big_g < self.g {
            return Err(Error::PadTooSmall {
                from: self.g,
                to: big_g,
            });
        }
        let generators = self
            .generators
            .iter()
            .map(|q| q.pad(big_g))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixCone {
            g: big_g,
            generators,
        })
    }

    /// Positive semidefiniteness of each generator (all principal minors
    /// nonnegative).
    pub fn psd_flags(&self) -> Vec<bool> {
        self.generators.iter().map(is_psd).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.g, self.len());
        for (k, q) in self.generators.iter().enumerate() {
            if k > 0 {
                s.push('\n');
            }
            for row in q.rows() {
                let parts: Vec<String> = row.iter().map(|x| format!("{x:>3}")).collect();
                s.push_str(parts.join(" ").trim_start());
                s.push('\n');
            }
        }
        s
    }
}

fn is_psd(q: &SymForm) -> bool {
    let g = q.g();
    let m = q.to_matrix();
    (1..=g).all(|k| {
        Combinations::new(g, k).all(|idx| {
            let rows = idx
                .iter()
                .map(|&i| idx.iter().map(|&j| m[(i, j)].clone()).collect())
                .collect();
            !IntMatrix::from_rows(rows)
                .and_then(|sub| sub.det())
                .expect("square minor")
                .is_negative()
        })
    })
}

fn forms(g: usize, mats: &[&[i64]]) -> Vec<SymForm> {
    mats.chunks(g)
        .map(|rows| SymForm::from_i64_rows(rows).expect("symmetric constant"))
        .collect()
}

/// Two cones in `Sym^2(Z^5)` spanned by four generators but of dimension 3.
pub fn second_voronoi_examples() -> [MatrixCone; 2] {
    let first = forms(
        5,
        &[
            &[4, -2, -2, 0, -2],
            &[-2, 4, 0, -1, 1],
            &[-2, 0, 4, -1, 1],
            &[0, -1, -1, 3, -1],
            &[-2, 1, 1, -1, 3],
            //
            &[2, -1, -1, 0, -1],
            &[-1, 2, 0, 0, 0],
            &[-1, 0, 2, -1, 1],
            &[0, 0, -1, 2, -1],
            &[-1, 0, 1, -1, 2],
            //
            &[2, -1, -1, 0, -1],
            &[-1, 2, 0, -1, 1],
            &[-1, 0, 2, 0, 0],
            &[0, -1, 0, 2, -1],
            &[-1, 1, 0, -1, 2],
            //
            &[0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0],
            &[0, 0, 0, 1, -1],
            &[0, 0, 0, -1, 1],
        ],
    );
    let second = forms(
        5,
        &[
            &[3, -1, -1, -1, -1],
            &[-1, 4, -1, -1, 0],
            &[-1, -1, 3, 1, -1],
            &[-1, -1, 1, 3, -1],
            &[-1, 0, -1, -1, 4],
            //
            &[6, -2, -2, -2, -2],
            &[-2, 6, -1, -1, 0],
            &[-2, -1, 4, 1, -1],
            &[-2, -1, 1, 4, -1],
            &[-2, 0, -1, -1, 6],
            //
            &[2, 0, -1, -1, -1],
            &[0, 2, -1, -1, 0],
            &[-1, -1, 2, 1, 0],
            &[-1, -1, 1, 2, 0],
            &[-1, 0, 0, 0, 2],
            //
            &[5, -1, -2, -2, -2],
            &[-1, 4, -1, -1, 0],
            &[-2, -1, 3, 1, 0],
            &[-2, -1, 1, 3, 0],
            &[-2, 0, 0, 0, 4],
        ],
    );
    [
        MatrixCone::new(first).expect("nonempty"),
        MatrixCone::new(second).expect("nonempty"),
    ]
}

pub fn write_cones(cones: &[MatrixCone]) -> String {
    cones
        .iter()
        .map(MatrixCone::to_text)
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_cones(text: &str) -> Result<Vec<MatrixCone>> {
    let mut lines = data_lines(text);
    let mut cones = Vec::new();
    while let Some((hline, header)) = lines.next() {
        let header = parse_ints(hline, header)?;
        let [g, k] = &header[..] else {
            return Err(Error::Parse {
                line: hline,
                message: "header must be `g K`".into(),
            });
        };
        let (g, k) = (to_count(hline, g)?, to_count(hline, k)?);
        if g == 0 || k == 0 {
            return Err(Error::Parse {
                line: hline,
                message: "a cone needs g >= 1 and at least one generator".into(),
            });
        }
        let mut generators = Vec::with_capacity(k);
        for m in 0..k {
            let mut entries = Vec::with_capacity(g * g);
            let mut row_lines = Vec::with_capacity(g);
            for r in 0..g {
                let (line, body) = lines.next().ok_or(Error::Parse {
                    line: hline,
                    message: format!("matrix {} ends after {r} of {g} rows", m + 1),
                })?;
                row_lines.push(line);
                let row = parse_ints(line, body)?;
                if row.len() != g {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {g} entries, found {}", row.len()),
                    });
                }
                entries.extend(row);
            }
            let q = SymForm::new(g, entries).map_err(|e| match e {
                Error::NotSymmetric { row, col } => Error::Parse {
                    line: row_lines[row],
                    message: format!(
                        "matrix {} is not symmetric: entry ({}, {}) differs from ({}, {})",
                        m + 1,
                        row + 1,
                        col + 1,
                        col + 1,
                        row + 1
                    ),
                },
                other => other,
            })?;
            generators.push(q);
        }
        cones.push(MatrixCone::new(generators)?);
    }
    Ok(cones)
}

pub fn ingest_cone_file(path: &Path) -> Result<Vec<MatrixCone>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_cones(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{IntVec, VectorConfig};

    #[test]
    fn embedded_cones_are_three_dimensional() {
        for c in second_voronoi_examples() {
            assert_eq!(c.len(), 4);
            assert_eq!(c.cone_dimension(), 3);
            assert!(!c.is_simplicial());
            assert!(!c.is_basic());
            // regression value: the generated lattice is saturated
            assert_eq!(c.sublattice_index(), BigInt::from(1));
            for big in [5, 6, 7] {
                let p = c.pad_to(big).unwrap();
                assert_eq!((p.g(), p.len(), p.cone_dimension()), (big, 4, 3));
                assert!(!p.is_simplicial());
            }
        }
    }

    #[test]
    fn embedded_generators_are_psd() {
        for c in second_voronoi_examples() {
            assert!(c.psd_flags().into_iter().all(|f| f));
        }
        let indefinite =
            MatrixCone::new(vec![SymForm::from_i64_rows(&[&[1, 2], &[2, 1]]).unwrap()]).unwrap();
        assert_eq!(indefinite.psd_flags(), vec![false]);
    }

    #[test]
    fn small_examples() {
        let id = MatrixCone::new(vec![SymForm::identity(2)]).unwrap();
        assert_eq!(id.cone_dimension(), 1);
        assert!(id.is_simplicial());
        assert_eq!(id.pad_to(2).unwrap(), id);
        let padded = id.pad_to(3).unwrap();
        assert_eq!(padded.generators()[0].to_matrix().rank(), 2);
        assert_eq!(padded.cone_dimension(), 1);
        assert_eq!(id.pad_to(1), Err(Error::PadTooSmall { from: 2, to: 1 }));
        let units = VectorConfig::new(2, vec![IntVec::unit(2, 0), IntVec::unit(2, 1)]).unwrap();
        let c = MatrixCone::from_ray_cone(&RayCone::new(units).unwrap());
        assert!(c.is_basic());
    }

    #[test]
    fn perfect_top_cones_for_small_g_are_basic() {
        for name in ["A2", "A3"] {
            let cone = crate::domains::by_name(name).unwrap().cone().unwrap();
            assert!(MatrixCone::from_ray_cone(&cone).is_basic());
        }
    }

    #[test]
    fn file_round_trip() {
        let cones = second_voronoi_examples().to_vec();
        let text = write_cones(&cones);
        assert_eq!(parse_cones(&text).unwrap(), cones);
        assert!(parse_cones("").unwrap().is_empty());
        assert!(parse_cones("# nothing here\n\n").unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let asym = "2 1\n1 2\n3 1\n";
        match parse_cones(asym) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("(1, 2)"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_cones("2 1\n1 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_cones("2 1\n1 0 0\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_cones("2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_cones("2 1\n1 x\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_cone() -> impl Strategy<Value = MatrixCone> {
            (1usize..=3).prop_flat_map(|g| {
                proptest::collection::vec(
                    proptest::collection::vec(-3i64..=3, g * (g + 1) / 2),
                    1..5,
                )
                .prop_map(move |gens| {
                    let forms = gens
                        .iter()
                        .map(|c| {
                            let coords: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
                            SymForm::from_sym2_coords(g, &coords).unwrap()
                        })
                        .collect();
                    MatrixCone::new(forms).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn padding_preserves_dimension(c in small_cone(), extra in 0usize..3) {
                let p = c.pad_to(c.g() + extra).unwrap();
                prop_assert_eq!(p.cone_dimension(), c.cone_dimension());
                prop_assert_eq!(p.len(), c.len());
                prop_assert_eq!(p.is_simplicial(), c.is_simplicial());
            }

            #[test]
            fn text_round_trip(c in small_cone()) {
                prop_assert_eq!(parse_cones(&c.to_text()).unwrap(), vec![c]);
            }
        }
    }
}
