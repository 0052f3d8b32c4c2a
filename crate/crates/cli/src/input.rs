use std::path::Path;

use perfcone::classify::NamedCone;
use perfcone::cone::RayCone;
use perfcone::domains::by_name;
use perfcone::forms::{RatForm, VectorConfig};
use perfcone::voronoi2::{parse_cones, MatrixCone};
use perfcone::Error;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Vectors,
    Matrices,
}

pub enum Input {
    Vectors(VectorConfig),
    Matrices(Vec<MatrixCone>),
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        Failure::Input(
            Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            }
            .to_string(),
        )
    })
}

fn at(path: &Path, e: Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

/// A vector file `g M` has exactly `M` data lines after its header; a
/// matrix file `g K` has `K * g`.
pub fn detect(text: &str) -> Kind {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<usize> = lines
        .next()
        .map(|h| {
            h.split_whitespace()
                .filter_map(|t| t.parse().ok())
                .collect()
        })
        .unwrap_or_default();
    let rest = lines.count();
    match header[..] {
        [g, k] if g > 1 && rest != k && rest >= k * g => Kind::Matrices,
        _ => Kind::Vectors,
    }
}

pub fn load(path: &Path, kind: Option<Kind>) -> Result<Input, Failure> {
    let text = read(path)?;
    match kind.unwrap_or_else(|| detect(&text)) {
        Kind::Vectors => Ok(Input::Vectors(
            VectorConfig::parse(&text).map_err(|e| at(path, e))?,
        )),
        Kind::Matrices => Ok(Input::Matrices(
            parse_cones(&text).map_err(|e| at(path, e))?,
        )),
    }
}

pub fn load_vectors(path: &Path) -> Result<VectorConfig, Failure> {
    VectorConfig::parse(&read(path)?).map_err(|e| at(path, e))
}

/// A single symmetric matrix in the cone file format (`g 1`).
pub fn load_gram(path: &Path) -> Result<RatForm, Failure> {
    let cones = parse_cones(&read(path)?).map_err(|e| at(path, e))?;
    match &cones[..] {
        [c] if c.len() == 1 => Ok(c.generators()[0].to_rational()),
        _ => Err(Failure::Input(format!(
            "{}: expected exactly one matrix",
            path.display()
        ))),
    }
}

/// Built-in domain names resolve to their perfect cones; anything else is
/// read as a vector file listing the cone's generators.
pub fn domain(name_or_path: &str) -> Result<NamedCone, Failure> {
    if let Some(d) = by_name(name_or_path) {
        let cone = d.cone().map_err(|e| Failure::Input(e.to_string()))?;
        return Ok(NamedCone { name: d.name, cone });
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Failure::Input(format!(
            "`{name_or_path}` is neither a built-in domain (A2, A3, A4, D4, E7*) nor a file"
        )));
    }
    let config = load_vectors(path)?;
    let cone = RayCone::new(config).map_err(|e| at(path, e))?;
    Ok(NamedCone {
        name: name_or_path.to_string(),
        cone,
    })
}

pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{t}` is not a dimension"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let d = parse(s)?;
            (d, d)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("empty dimension range `{s}`"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_ranges() {
        assert_eq!(parse_dims("1..3"), Ok((1, 3)));
        assert_eq!(parse_dims("1..=3"), Ok((1, 3)));
        assert_eq!(parse_dims("10"), Ok((10, 10)));
        assert!(parse_dims("3..1").is_err());
        assert!(parse_dims("0..2").is_err());
        assert!(parse_dims("x").is_err());
    }

    #[test]
    fn detection_by_line_count() {
        assert_eq!(detect("2 2\n1 0\n0 1\n"), Kind::Vectors);
        assert_eq!(detect("2 1\n1 0\n0 1\n"), Kind::Matrices);
        assert_eq!(detect("# c\n2 2\n1 0\n0 1\n\n0 0\n0 1\n"), Kind::Matrices);
        assert_eq!(detect(""), Kind::Vectors);
    }
}
