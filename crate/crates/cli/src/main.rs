//! `hnslope` — command-line surface for the slope-calculus library.
//!
//! Exit codes: 0 success, 1 computation error or failing check suites,
//! 2 usage/parse error, 3 precision exhausted, 4 no admissible filtration.

mod svg;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::ToPrimitive;

use hnslope_core::checks::{run_all, run_suite, CheckConfig, SuiteReport};
use hnslope_core::error::Error;
use hnslope_core::hn::{filtration_type, hn_filtration, semistable};
use hnslope_core::linalg::{lattice_distance, relative_filtration, snf, torsion_inv, Matrix};
use hnslope_core::parse::{
    parse_crystal_file, parse_ht_file, parse_isocrystal_file, parse_labeled_polygons,
    parse_matrix_file, parse_phi_module_file, parse_poset_file, ParsedMatrix,
};
use hnslope_core::phimod::fargues_type;
use hnslope_core::polygon::SlopeVector;
use hnslope_core::rat::{fmt_rat, parse_rat};
use hnslope_core::rings::ValuedRing;
use hnslope_core::slopes::{
    ht_degree, ht_hodge_type, hodge_type_crystal, mazur_check, newton_iota_type, newton_type,
};

#[derive(Parser)]
#[command(name = "hnslope", version, about = "Slope calculus for lattices, φ-modules and filtrations")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Seed for the randomized check suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Extra truncation (series exponent cutoff) applied to matrix inputs.
    #[arg(long, global = true)]
    prec: Option<String>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print intermediate pivots and point clouds to standard error.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Slope-vector calculus on inline `[a, b, ...]` literals.
    Poly {
        #[command(subcommand)]
        op: PolyOp,
    },
    /// Smith normal form of a matrix file: rank and diagonal valuations.
    Snf(FileArg),
    /// Lattice distance type of an invertible matrix file.
    Dist(FileArg),
    /// Torsion invariant of a presentation matrix file.
    Inv(FileArg),
    /// Residue filtration of an invertible matrix file.
    Filt(FileArg),
    /// Hodge type of a φ-module file.
    Hodge(FileArg),
    /// Newton type and its negated reversal for an isocrystal file.
    Newton(FileArg),
    /// Newton/Hodge comparison for a crystal lattice file.
    Mazur(FileArg),
    /// Fargues type of a φ-module file with a trivialization block.
    Fargues(FileArg),
    /// Hodge type and degree of a Hodge–Tate module file.
    Ht(FileArg),
    /// Canonical filtration of a decorated poset file.
    Hn(FileArg),
    /// Twist an object file by an integer and print the shifted types.
    Twist {
        #[arg(value_enum)]
        kind: TwistKind,
        #[arg(allow_hyphen_values = true)]
        n: i64,
        file: PathBuf,
    },
    /// Run the property-check suites and emit a JSON report.
    Check {
        /// Run only the named suites (default: all).
        #[arg(long)]
        suite: Vec<String>,
        /// Case count per suite (0 emits an empty report).
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long, hide = true)]
        broken_oracle: bool,
    },
    /// Render labeled polygons to a deterministic 800×600 SVG.
    Plot {
        /// Inline `[a, b, ...]` slope vectors.
        vectors: Vec<String>,
        /// Labeled polygon file (`label=[a, b, ...]` lines).
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FileArg {
    file: PathBuf,
}

#[derive(Subcommand)]
enum PolyOp {
    /// Convex sum of the given vectors.
    Sum {
        #[arg(required = true)]
        vectors: Vec<String>,
    },
    /// Dominance comparison of two vectors.
    Dom { left: String, right: String },
    /// Slope-negating involution.
    Iota { vector: String },
    /// Tensor type of two vectors.
    Tensor { left: String, right: String },
    /// k-th exterior type.
    Ext { k: usize, vector: String },
    /// k-th symmetric type.
    Sym { k: usize, vector: String },
    /// Polygon value at a rational point.
    Eval { at: String, vector: String },
    /// Shift every slope by an integer.
    Shift {
        #[arg(allow_hyphen_values = true)]
        n: i64,
        vector: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TwistKind {
    /// φ-module file (with optional trivialization block).
    Phi,
    /// Isocrystal file.
    Iso,
    /// Crystal lattice file.
    Crystal,
    /// Hodge–Tate module file.
    Ht,
}

enum AppError {
    Core(Error),
    Read(PathBuf, std::io::Error),
    Write(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Core(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(e) => match e {
                Error::Parse { .. } | Error::Schema(_) | Error::InvalidPoset(_) => 2,
                Error::PrecisionExhausted(_) => 3,
                Error::NotAdmissible { .. } => 4,
                _ => 1,
            },
            AppError::Read(..) | AppError::Usage(_) => 2,
            AppError::Write(..) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Core(e) => format!("error: {e}"),
            AppError::Read(p, e) => format!("error: cannot read {}: {e}", p.display()),
            AppError::Write(p, e) => format!("error: cannot write {}: {e}", p.display()),
            AppError::Usage(m) => format!("usage error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|e| AppError::Read(path.to_path_buf(), e))
}

fn write_out(out: Option<&Path>, body: &str) -> Result<(), AppError> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| AppError::Write(path.to_path_buf(), e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| AppError::Write(PathBuf::from("<stdout>"), e))
        }
    }
}

/// Applies the global `--prec` cutoff to series matrices; p-adic matrices are
/// exact and pass through.
fn apply_prec(pm: ParsedMatrix, prec: Option<&str>) -> Result<ParsedMatrix, AppError> {
    let Some(text) = prec else { return Ok(pm) };
    let p = parse_rat(text)?;
    Ok(match pm {
        ParsedMatrix::Hahn(m) => {
            ParsedMatrix::Hahn(m.map(|e| Ok(e.clone().truncated(Some(p.clone()))))?)
        }
        ParsedMatrix::Xi(m) => {
            if !p.is_integer() {
                return Err(Error::Schema("xi precision must be an integer".into()).into());
            }
            let n = p
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Schema("precision out of range".into()))?;
            ParsedMatrix::Xi(m.map(|e| Ok(e.clone().truncated(Some(n))))?)
        }
        ParsedMatrix::Padic(m) => ParsedMatrix::Padic(m),
    })
}

macro_rules! on_matrix {
    ($pm:expr, |$m:ident| $body:expr) => {
        match &$pm {
            ParsedMatrix::Hahn($m) => $body,
            ParsedMatrix::Padic($m) => $body,
            ParsedMatrix::Xi($m) => $body,
        }
    };
}

fn snf_lines<R: ValuedRing>(m: &Matrix<R>, verbose: bool) -> Result<String, Error> {
    let result = snf(m)?;
    if verbose {
        for (i, d) in result.diagonal.iter().enumerate() {
            eprintln!("pivot {i}: {d}");
        }
    }
    let vals = result
        .valuations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    Ok(format!("rank: {}\nvaluations: [{}]\n", result.rank, vals))
}

fn filt_lines<R: ValuedRing>(m: &Matrix<R>, verbose: bool) -> Result<String, Error> {
    let f = relative_filtration(m)?;
    if verbose {
        for (i, basis) in f.subspace_bases().iter().enumerate() {
            eprintln!("basis {i}:");
            for r in 0..basis.rows() {
                let row = (0..basis.cols())
                    .map(|c| basis.at(r, c).to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                eprintln!("  {row}");
            }
        }
    }
    let jumps = f.jumps().iter().map(fmt_rat).collect::<Vec<_>>().join(", ");
    let dims = f
        .dimensions()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    Ok(format!(
        "jumps: [{jumps}]\ndimensions: [{dims}]\ntype: {}\n",
        f.filtration_type()
    ))
}

fn parse_vector(text: &str) -> Result<SlopeVector, Error> {
    text.parse()
}

fn run_poly(op: &PolyOp) -> Result<String, AppError> {
    Ok(match op {
        PolyOp::Sum { vectors } => {
            let mut acc = SlopeVector::empty();
            for v in vectors {
                acc = acc.convex_sum(&parse_vector(v)?);
            }
            format!("{acc}\n")
        }
        PolyOp::Dom { left, right } => {
            let d = parse_vector(left)?.dominance(&parse_vector(right)?)?;
            format!("{d}\n")
        }
        PolyOp::Iota { vector } => format!("{}\n", parse_vector(vector)?.involution()),
        PolyOp::Tensor { left, right } => {
            format!("{}\n", parse_vector(left)?.tensor(&parse_vector(right)?))
        }
        PolyOp::Ext { k, vector } => format!("{}\n", parse_vector(vector)?.ext(*k)?),
        PolyOp::Sym { k, vector } => format!("{}\n", parse_vector(vector)?.sym(*k)?),
        PolyOp::Eval { at, vector } => {
            let value = parse_vector(vector)?.eval(&parse_rat(at)?)?;
            format!("{}\n", fmt_rat(&value))
        }
        PolyOp::Shift { n, vector } => format!("{}\n", parse_vector(vector)?.twist_shift(*n)),
    })
}

fn run_twist(kind: TwistKind, n: i64, text: &str, verbose: bool) -> Result<String, AppError> {
    Ok(match kind {
        TwistKind::Phi => {
            let (m, t) = parse_phi_module_file(text)?;
            let twisted = m.twist(n)?;
            let mut out = format!("hodge: {}\n", twisted.hodge_type()?);
            if let Some(t) = t {
                let outcome = fargues_type(&twisted, &t.twist(n, m.q())?)?;
                if verbose {
                    for (jump, _) in &outcome.filtration {
                        eprintln!("breakpoint slope: {}", fmt_rat(jump));
                    }
                }
                out.push_str(&format!("fargues: {}\n", outcome.fargues_type));
            }
            out
        }
        TwistKind::Iso => {
            let d = parse_isocrystal_file(text)?.twist(n)?;
            format!("newton: {}\niota: {}\n", newton_type(&d)?, newton_iota_type(&d)?)
        }
        TwistKind::Crystal => {
            let x = parse_crystal_file(text)?.twist(n)?;
            format!(
                "iota: {}\nhodge: {}\n",
                newton_iota_type(&x.isocrystal())?,
                hodge_type_crystal(&x)?
            )
        }
        TwistKind::Ht => {
            let h = parse_ht_file(text)?.twist(n)?;
            format!(
                "hodge: {}\ndegree: {}\n",
                ht_hodge_type(&h)?,
                fmt_rat(&ht_degree(&h)?)
            )
        }
    })
}

fn run_check(
    seed: u64,
    suites: &[String],
    cases: Option<usize>,
    broken_oracle: bool,
    out: Option<&Path>,
) -> Result<ExitCode, AppError> {
    let config = CheckConfig { seed, cases, broken_oracle };
    let reports: Vec<SuiteReport> = if cases == Some(0) {
        Vec::new()
    } else if suites.is_empty() {
        run_all(&config)?
    } else {
        suites
            .iter()
            .map(|s| run_suite(s, &config))
            .collect::<Result<_, _>>()?
    };
    let mut body = serde_json::to_string_pretty(&reports).expect("reports serialize");
    body.push('\n');
    write_out(out, &body)?;
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.suite.as_str())
        .collect();
    if failing.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failing suites: {}", failing.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn run(cli: Cli) -> Result<ExitCode, AppError> {
    let out = cli.out.as_deref();
    let prec = cli.prec.as_deref();
    match &cli.verb {
        Verb::Poly { op } => write_out(out, &run_poly(op)?)?,
        Verb::Snf(f) => {
            let pm = apply_prec(parse_matrix_file(&read(&f.file)?)?, prec)?;
            let body = on_matrix!(pm, |m| snf_lines(m, cli.verbose))?;
            write_out(out, &body)?;
        }
        Verb::Dist(f) => {
            let pm = apply_prec(parse_matrix_file(&read(&f.file)?)?, prec)?;
            let body = on_matrix!(pm, |m| lattice_distance(m).map(|d| format!("{d}\n")))?;
            write_out(out, &body)?;
        }
        Verb::Inv(f) => {
            let pm = apply_prec(parse_matrix_file(&read(&f.file)?)?, prec)?;
            let body = on_matrix!(pm, |m| torsion_inv(m).map(|t| format!("{t}\n")))?;
            write_out(out, &body)?;
        }
        Verb::Filt(f) => {
            let pm = apply_prec(parse_matrix_file(&read(&f.file)?)?, prec)?;
            let body = on_matrix!(pm, |m| filt_lines(m, cli.verbose))?;
            write_out(out, &body)?;
        }
        Verb::Hodge(f) => {
            let (m, _) = parse_phi_module_file(&read(&f.file)?)?;
            write_out(out, &format!("{}\n", m.hodge_type()?))?;
        }
        Verb::Newton(f) => {
            let d = parse_isocrystal_file(&read(&f.file)?)?;
            let body = format!(
                "newton: {}\niota: {}\n",
                newton_type(&d)?,
                newton_iota_type(&d)?
            );
            write_out(out, &body)?;
        }
        Verb::Mazur(f) => {
            let x = parse_crystal_file(&read(&f.file)?)?;
            let body = format!(
                "iota: {}\nhodge: {}\noutcome: {}\n",
                newton_iota_type(&x.isocrystal())?,
                hodge_type_crystal(&x)?,
                mazur_check(&x)?
            );
            write_out(out, &body)?;
        }
        Verb::Fargues(f) => {
            let (m, t) = parse_phi_module_file(&read(&f.file)?)?;
            let Some(t) = t else {
                return Err(Error::Schema(
                    "fargues needs a trivialization block in the module file".into(),
                )
                .into());
            };
            let outcome = fargues_type(&m, &t)?;
            if cli.verbose {
                for (jump, _) in &outcome.filtration {
                    eprintln!("breakpoint slope: {}", fmt_rat(jump));
                }
            }
            write_out(out, &format!("{}\n", outcome.fargues_type))?;
        }
        Verb::Ht(f) => {
            let h = parse_ht_file(&read(&f.file)?)?;
            let body = format!(
                "hodge: {}\ndegree: {}\n",
                ht_hodge_type(&h)?,
                fmt_rat(&ht_degree(&h)?)
            );
            write_out(out, &body)?;
        }
        Verb::Hn(f) => {
            let poset = parse_poset_file(&read(&f.file)?)?;
            if cli.verbose {
                for i in 0..poset.len() {
                    eprintln!(
                        "point {}: rank {} deg {}",
                        poset.id(i),
                        poset.rank_of(i),
                        fmt_rat(poset.deg_of(i))
                    );
                }
            }
            let filt = hn_filtration(&poset)?;
            let chain = filt.chain_ids(&poset).join(" < ");
            let jumps = filt.jumps().iter().map(fmt_rat).collect::<Vec<_>>().join(", ");
            let body = format!(
                "chain: {chain}\njumps: [{jumps}]\ntype: {}\nsemistable: {}\n",
                filtration_type(&filt, &poset)?,
                semistable(&poset)
            );
            write_out(out, &body)?;
        }
        Verb::Twist { kind, n, file } => {
            let body = run_twist(*kind, *n, &read(file)?, cli.verbose)?;
            write_out(out, &body)?;
        }
        Verb::Check { suite, cases, broken_oracle } => {
            return run_check(cli.seed, suite, *cases, *broken_oracle, out);
        }
        Verb::Plot { vectors, file } => {
            let mut labeled = Vec::new();
            if let Some(path) = file {
                labeled.extend(parse_labeled_polygons(&read(path)?)?);
            }
            for text in vectors {
                let v = parse_vector(text)?;
                labeled.push((format!("P{}", labeled.len() + 1), v.to_polygon()));
            }
            if labeled.is_empty() {
                return Err(AppError::Usage("plot needs at least one polygon".into()));
            }
            if cli.verbose {
                for (label, poly) in &labeled {
                    eprintln!("{label}: {}", svg::point_cloud(poly));
                }
            }
            write_out(out, &svg::render(&labeled))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
