use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use perfcone::checks::{self, CheckOptions};
use perfcone::classify::{builtin_named_cones, classify_faces, NamedCone};
use perfcone::cone::RayCone;
use perfcone::equiv::{are_equivalent, automorphism_group};
use perfcone::exactlinalg::IntMatrix;
use perfcone::forms::{IntVec, RatForm};
use perfcone::realize::{is_perfect_cone_config, Obstruction};
use perfcone::voronoi2::MatrixCone;
use perfcone::Error;
use serde_json::{json, Value};

/// `println!` that ends the process quietly when stdout is closed early.
macro_rules! say {
    ($($arg:tt)*) => {
        crate::write_stdout(&format!("{}\n", format_args!($($arg)*)))
    };
}

mod input;

use input::{Input, Kind};

/// Exit 1 for a mathematical outcome that is "no", exit 2 for bad input.
pub enum Failure {
    Negative(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ClaimViolated { .. } => Failure::Negative(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "perfcone",
    version,
    about = "Exact computations with perfect cones"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PERFCONE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension, ray count, simplicial and basic flags, sublattice index.
    Check {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Override header-based detection of the file kind.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Decide whether the vectors are exactly the minimal vectors of some
    /// form; exits 1 when they are not.
    Realize {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Orbits of faces of perfect domains, as a JSON report.
    Classify {
        #[arg(long)]
        g: usize,
        /// `A..B`, `A..=B` or a single dimension.
        #[arg(long, value_parser = input::parse_dims)]
        dims: Option<(usize, usize)>,
        /// Comma-separated built-in names (A2, A3, A4, D4, E7*) or vector files.
        #[arg(long, value_delimiter = ',')]
        domains: Vec<String>,
        #[arg(long)]
        include_e7: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unimodular equivalence; exits 1 when inequivalent.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Stabilizer of a configuration: order and generators.
    Aut {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Run the reproduction suite; exits 1 naming the first failing check.
    Verify {
        #[arg(long)]
        json: bool,
        /// Replace the built-in D4 Gram matrix (negative control).
        #[arg(long, hide = true)]
        d4_gram: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Check { path, format, kind } => check(&path, format, kind),
        Command::Realize { path, format } => realize(&path, format),
        Command::Classify {
            g,
            dims,
            domains,
            include_e7,
            out,
        } => classify(g, dims, &domains, include_e7, out.as_deref()),
        Command::Equiv { a, b, format } => equiv(&a, &b, format),
        Command::Aut { path, format } => aut(&path, format),
        Command::Verify { json, d4_gram } => verify(json, d4_gram.as_deref()),
    }
}

fn write_stdout(text: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
    {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

fn emit(value: &Value) {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    say!("{text}");
}

fn table(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        say!("{k:<width$}  {v}");
    }
}

fn vec_json(v: &IntVec) -> Value {
    Value::Array(v.0.iter().map(|x| Value::String(x.to_string())).collect())
}

fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(|x| Value::String(x.to_string())).collect()))
            .collect(),
    )
}

fn matrix_text(m: &IntMatrix) -> String {
    m.to_rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn form_rows(q: &RatForm) -> Vec<Vec<String>> {
    q.rows()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect()
}

fn ray_cone_json(cone: &RayCone) -> Value {
    json!({
        "kind": "vectors",
        "g": cone.g().to_string(),
        "dim": cone.dimension().to_string(),
        "rays": cone.len().to_string(),
        "simplicial": cone.is_simplicial(),
        "basic": cone.is_basic(),
        "index": cone.sublattice_index().to_string(),
    })
}

fn matrix_cone_json(cone: &MatrixCone) -> Value {
    json!({
        "g": cone.g().to_string(),
        "dim": cone.cone_dimension().to_string(),
        "generators": cone.len().to_string(),
        "simplicial": cone.is_simplicial(),
        "basic": cone.is_basic(),
        "index": cone.sublattice_index().to_string(),
        "psd": cone.psd_flags(),
    })
}

fn check(path: &Path, format: Format, kind: Option<Kind>) -> Result<(), Failure> {
    match (input::load(path, kind)?, format) {
        (Input::Vectors(config), Format::Json) => emit(&ray_cone_json(&RayCone::new(config)?)),
        (Input::Vectors(config), Format::Table) => {
            let cone = RayCone::new(config)?;
            table(&[
                ("g", cone.g().to_string()),
                ("dim", cone.dimension().to_string()),
                ("rays", cone.len().to_string()),
                ("simplicial", cone.is_simplicial().to_string()),
                ("basic", cone.is_basic().to_string()),
                ("index", cone.sublattice_index().to_string()),
            ]);
        }
        (Input::Matrices(cones), Format::Json) => emit(&json!({
            "kind": "matrices",
            "cones": cones.iter().map(matrix_cone_json).collect::<Vec<_>>(),
        })),
        (Input::Matrices(cones), Format::Table) => {
            say!("cone  g  dim  generators  simplicial  basic  index  psd");
            for (i, c) in cones.iter().enumerate() {
                let psd = c.psd_flags().iter().all(|&p| p);
                say!(
                    "{:<4}  {:<2} {:<4} {:<11} {:<11} {:<6} {:<6} {}",
                    i + 1,
                    c.g(),
                    c.cone_dimension(),
                    c.len(),
                    c.is_simplicial(),
                    c.is_basic(),
                    c.sublattice_index(),
                    if psd { "all" } else { "not all" }
                );
            }
        }
    }
    Ok(())
}

fn realize(path: &Path, format: Format) -> Result<(), Failure> {
    let config = input::load_vectors(path)?;
    let verdict = is_perfect_cone_config(&config)?;
    let obstruction = verdict.obstruction.as_ref().map(|o| match o {
        Obstruction::Infeasible { cuts } => json!({
            "kind": "infeasible",
            "cuts": cuts.iter().map(vec_json).collect::<Vec<_>>(),
        }),
        Obstruction::ForcedVector { vector, cuts } => json!({
            "kind": "forced_vector",
            "vector": vec_json(vector),
            "cuts": cuts.iter().map(vec_json).collect::<Vec<_>>(),
        }),
    });
    match format {
        Format::Json => emit(&json!({
            "realizable": verdict.realizable,
            "witness": verdict.witness.as_ref().map(form_rows),
            "obstruction": obstruction,
            "iterations": verdict.iterations.to_string(),
        })),
        Format::Table => {
            if let Some(w) = &verdict.witness {
                say!("realizable");
                say!("witness (minimum 2, minimal vectors exactly the input):");
                for row in form_rows(w) {
                    say!("  {}", row.join(" "));
                }
            } else {
                say!("not realizable");
                match &verdict.obstruction {
                    Some(Obstruction::ForcedVector { vector, .. }) => {
                        say!("every candidate form also has ({vector}) among its minimal vectors");
                    }
                    Some(Obstruction::Infeasible { cuts }) => {
                        say!("no form attains value 2 on the input while exceeding it on {} other vectors", cuts.len());
                    }
                    None => {}
                }
            }
        }
    }
    if verdict.realizable {
        Ok(())
    } else {
        Err(Failure::Negative(format!(
            "{}: not realizable",
            path.display()
        )))
    }
}

fn classify(
    g: usize,
    dims: Option<(usize, usize)>,
    domains: &[String],
    include_e7: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cones: Vec<NamedCone> = if domains.is_empty() {
        if g > 4 && !(g == 7 && include_e7) {
            return Err(Failure::Input(format!(
                "no built-in domains for g={g}; pass --domains"
            )));
        }
        builtin_named_cones(g, include_e7)?
    } else {
        let mut cones = domains
            .iter()
            .map(|d| input::domain(d))
            .collect::<Result<Vec<_>, _>>()?;
        if include_e7 && g == 7 && !cones.iter().any(|c| c.name == "E7*") {
            cones.extend(builtin_named_cones(7, true)?);
        }
        cones
    };
    if let Some(c) = cones.iter().find(|c| c.cone.g() != g) {
        return Err(Failure::Input(format!(
            "domain {} lives in dimension {}, not {g}",
            c.name,
            c.cone.g()
        )));
    }
    let top = g * (g + 1) / 2;
    let (lo, hi) = dims.unwrap_or((1, top));
    let report = classify_faces(&cones, lo..=hi.min(top))?;
    let text = report.to_json_string();
    match out {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            say!(
                "{} orbits over dimensions {lo}..={} written to {}",
                report.total_orbits(),
                hi.min(top),
                path.display()
            );
        }
        None => write_stdout(&text),
    }
    Ok(())
}

fn equiv(a: &Path, b: &Path, format: Format) -> Result<(), Failure> {
    let ca = input::load_vectors(a)?;
    let cb = input::load_vectors(b)?;
    let witness = are_equivalent(&ca, &cb)?;
    match (format, &witness) {
        (Format::Json, _) => emit(&json!({
            "equivalent": witness.is_some(),
            "witness": witness.as_ref().map(|w| matrix_json(&w.u)),
        })),
        (Format::Table, Some(w)) => {
            say!("equivalent");
            say!("U = {}", matrix_text(&w.u));
        }
        (Format::Table, None) => say!("inequivalent"),
    }
    match witness {
        Some(_) => Ok(()),
        None => Err(Failure::Negative(format!(
            "{} and {} are inequivalent",
            a.display(),
            b.display()
        ))),
    }
}

fn aut(path: &Path, format: Format) -> Result<(), Failure> {
    let config = input::load_vectors(path)?;
    let group = automorphism_group(&config)?;
    match format {
        Format::Json => emit(&json!({
            "order": group.order.to_string(),
            "generators": group.generators.iter().map(matrix_json).collect::<Vec<_>>(),
        })),
        Format::Table => {
            say!("order {}", group.order);
            for u in &group.generators {
                say!("  {}", matrix_text(u));
            }
        }
    }
    Ok(())
}

fn verify(as_json: bool, d4_gram: Option<&Path>) -> Result<(), Failure> {
    let mut opts = CheckOptions {
        threads: rayon::current_num_threads().max(2),
        ..CheckOptions::default()
    };
    if let Some(path) = d4_gram {
        opts.d4_gram = input::load_gram(path)?;
    }
    let mut results = Vec::new();
    for &(id, _) in checks::CRITERIA.iter() {
        let r = checks::run_criterion(id, &opts)?;
        if !as_json {
            say!(
                "[{}] {:>2}. {} ({:.2}s): {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.id,
                r.name,
                r.elapsed.as_secs_f64(),
                r.detail
            );
        }
        results.push(r);
    }
    if as_json {
        emit(&checks::summary_json(&results));
    }
    match checks::first_failure(&results) {
        None => Ok(()),
        Some(r) => Err(Failure::Negative(format!(
            "first failing criterion: {}. {}",
            r.id, r.name
        ))),
    }
}
