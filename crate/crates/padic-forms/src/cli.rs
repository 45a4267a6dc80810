//! Command-line surface: `classify`, `witness`, `verify`, and `sweep`.
//!
//! All structured output (JSON) goes to standard output; diagnostics go to
//! standard error.  Exit codes are a total contract:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success (any non-singular verdict / independent)    |
//! | 1    | parse, shape, or input-file error                   |
//! | 2    | singular coefficient matrix                         |
//! | 3    | witness requested for a forced verdict              |
//! | 4    | certification failure (bundle or sweep)             |
//! | 5    | the supplied triple is not independent              |

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classifier::{classify, Classification, Verdict};
use crate::finite::{char_fn, CyclicGroup, FiniteDistribution};
use crate::forms::{normalize, NormalizedForms, RawForms};
use crate::sweep::{run_sweep, SweepConfig};
use crate::verifier::{
    functional_eq_check, independence_exact, FiniteForms, IndependenceReport, VerifierError,
};
use crate::witness::{build_witness_with, WitnessError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 1;
pub const EXIT_SINGULAR: u8 = 2;
pub const EXIT_WRONG_VERDICT: u8 = 3;
pub const EXIT_CERTIFICATION: u8 = 4;
pub const EXIT_DEPENDENT: u8 = 5;

/// Spectral comparisons share one global tolerance.
const SPECTRAL_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "padic-forms",
    version,
    about = "Classify and certify independence-forcing linear forms over the p-adic numbers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Arguments shared by every matrix-consuming subcommand.
#[derive(Args, Debug)]
pub struct MatrixArgs {
    /// Prime p (validated by trial division).
    #[arg(long)]
    pub p: u64,
    /// Coefficient matrix: rows separated by `;`, entries by `,`, each
    /// entry a p-adic literal (`[-]INT` or `[-]P^EXP[*UNIT]`).
    #[arg(long)]
    pub matrix: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide which regime the coefficient matrix falls into.
    Classify(MatrixArgs),
    /// Construct and certify a non-idempotent independent triple.
    Witness {
        #[command(flatten)]
        matrix: MatrixArgs,
        /// Model exponent override (default: max coefficient valuation + 2).
        #[arg(long)]
        n: Option<u32>,
        /// Path to a distribution JSON replacing the default inner
        /// distribution of the construction.
        #[arg(long)]
        inner: Option<PathBuf>,
    },
    /// Check independence of (L1, L2, L3) for three given distributions.
    Verify {
        #[command(flatten)]
        matrix: MatrixArgs,
        /// Model exponent; the three distributions must live on Z/p^n.
        #[arg(long)]
        n: u32,
        /// Paths to exactly three distribution JSON files (mu1 mu2 mu3).
        #[arg(required = true, num_args = 3)]
        distributions: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
    },
    /// Classify and certify every canonical instance on a finite grid.
    Sweep {
        /// Prime p.
        #[arg(long)]
        p: u64,
        /// Coefficient valuations range over 0..=V.
        #[arg(long, value_name = "V")]
        max_valuation: u32,
        /// Exclusive bound for unit parts (default p^2).
        #[arg(long)]
        unit_bound: Option<u64>,
        /// Random-candidate budget for forced-verdict searches.
        #[arg(long, default_value_t = 8)]
        budget: usize,
        /// Fixed model exponent (default: per-instance max valuation + 2).
        #[arg(long)]
        n: Option<u32>,
        /// Seed for the search's random phase.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include one record per instance in the report.
        #[arg(long)]
        records: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Joint-law factorization in exact rational arithmetic.
    Exact,
    /// Characteristic-function equation (floating point, tol 1e-9).
    Spectral,
    /// Run both and insist they agree.
    Both,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.  The binary wraps this; tests can call
/// it directly.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0.
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            e.print().ok();
            return code;
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Classify(m) => cmd_classify(&m),
        Command::Witness { matrix, n, inner } => cmd_witness(&matrix, n, inner.as_deref()),
        Command::Verify {
            matrix,
            n,
            distributions,
            method,
        } => cmd_verify(&matrix, n, &distributions, method),
        Command::Sweep {
            p,
            max_valuation,
            unit_bound,
            budget,
            n,
            seed,
            records,
        } => cmd_sweep(p, max_valuation, unit_bound, budget, n, seed, records),
    }
}

fn emit<T: Serialize>(value: &T) {
    use std::io::Write;
    match serde_json::to_string_pretty(value) {
        // Ignore write errors so a closed pipe (e.g. `| head`) is not a crash.
        Ok(text) => {
            let _ = writeln!(std::io::stdout(), "{text}");
        }
        Err(e) => eprintln!("serialization error: {e}"),
    }
}

fn diag(message: impl std::fmt::Display) {
    eprintln!("error: {message}");
}

fn parse_normalized(args: &MatrixArgs) -> Result<NormalizedForms, u8> {
    let raw = RawForms::parse(&args.matrix, args.p).map_err(|e| {
        diag(e);
        EXIT_PARSE
    })?;
    normalize(&raw).map_err(|e| {
        diag(e);
        EXIT_PARSE
    })
}

fn cmd_classify(args: &MatrixArgs) -> u8 {
    let nf = match parse_normalized(args) {
        Ok(nf) => nf,
        Err(code) => return code,
    };
    let cls: Classification = match classify(&nf) {
        Ok(cls) => cls,
        Err(e) => {
            diag(e);
            return EXIT_PARSE;
        }
    };
    emit(&cls);
    if cls.verdict == Verdict::Singular {
        diag("the three forms are linearly dependent");
        EXIT_SINGULAR
    } else {
        EXIT_OK
    }
}

fn read_distribution(path: &std::path::Path) -> Result<FiniteDistribution, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        diag(format_args!("{}: {e}", path.display()));
        EXIT_PARSE
    })?;
    serde_json::from_str(&text).map_err(|e| {
        diag(format_args!("{}: {e}", path.display()));
        EXIT_PARSE
    })
}

fn cmd_witness(args: &MatrixArgs, n: Option<u32>, inner: Option<&std::path::Path>) -> u8 {
    let nf = match parse_normalized(args) {
        Ok(nf) => nf,
        Err(code) => return code,
    };
    let inner_dist = match inner {
        Some(path) => match read_distribution(path) {
            Ok(mu) => Some(mu),
            Err(code) => return code,
        },
        None => None,
    };
    match build_witness_with(&nf, n, inner_dist.as_ref()) {
        Ok(bundle) => {
            emit(&bundle);
            EXIT_OK
        }
        Err(WitnessError::WrongVerdict(v)) => {
            diag(format_args!(
                "verdict {v:?}: independence forces the property, no witness exists"
            ));
            EXIT_WRONG_VERDICT
        }
        Err(e @ WitnessError::CertificationFailed { .. }) => {
            diag(e);
            EXIT_CERTIFICATION
        }
        Err(e) => {
            diag(e);
            EXIT_PARSE
        }
    }
}

fn cmd_verify(args: &MatrixArgs, n: u32, paths: &[PathBuf], method: Method) -> u8 {
    let raw = match RawForms::parse(&args.matrix, args.p) {
        Ok(raw) => raw,
        Err(e) => {
            diag(e);
            return EXIT_PARSE;
        }
    };
    // The distributions describe the literal forms, so reduce the raw
    // matrix directly instead of normalizing.
    let mut matrix = [[0u64; 3]; 3];
    for (i, row) in raw.coeffs().iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            matrix[i][j] = match entry.reduce_mod(n) {
                Ok(r) => r,
                Err(e) => {
                    diag(format_args!("entry ({i},{j}): {e}"));
                    return EXIT_PARSE;
                }
            };
        }
    }
    let group = CyclicGroup::new(args.p, n);
    let forms = FiniteForms::new(group, matrix);
    let mut mus = Vec::with_capacity(3);
    for path in paths {
        match read_distribution(path) {
            Ok(mu) => {
                if mu.group() != group {
                    diag(format_args!(
                        "{}: distribution lives on Z/{}^{}, expected Z/{}^{n}",
                        path.display(),
                        mu.group().prime(),
                        mu.group().exponent(),
                        args.p,
                    ));
                    return EXIT_PARSE;
                }
                mus.push(mu);
            }
            Err(code) => return code,
        }
    }
    let triple = [&mus[0], &mus[1], &mus[2]];
    let spectral = || -> Result<IndependenceReport, VerifierError> {
        let chars: Vec<_> = triple.iter().map(|mu| char_fn(mu)).collect();
        functional_eq_check(&forms, [&chars[0], &chars[1], &chars[2]], SPECTRAL_TOL)
    };
    let report = match method {
        Method::Exact => independence_exact(&forms, triple),
        Method::Spectral => spectral(),
        Method::Both => crate::verifier::agreement(&forms, triple, SPECTRAL_TOL),
    };
    match report {
        Ok(report) => {
            emit(&report);
            if report.independent {
                EXIT_OK
            } else {
                EXIT_DEPENDENT
            }
        }
        Err(e @ VerifierError::Disagreement { .. }) => {
            diag(e);
            EXIT_CERTIFICATION
        }
        Err(e) => {
            diag(e);
            EXIT_PARSE
        }
    }
}

fn cmd_sweep(
    p: u64,
    max_valuation: u32,
    unit_bound: Option<u64>,
    budget: usize,
    n: Option<u32>,
    seed: u64,
    records: bool,
) -> u8 {
    if !crate::padic::is_prime(p) {
        diag(format_args!("{p} is not prime"));
        return EXIT_PARSE;
    }
    let mut cfg = SweepConfig::new(p, max_valuation);
    if let Some(b) = unit_bound {
        cfg.unit_bound = b;
    }
    cfg.budget = budget;
    cfg.exponent_override = n;
    cfg.seed = seed;
    cfg.include_records = records;
    let report = run_sweep(&cfg);
    let clean = report.failures.is_empty();
    emit(&report);
    if clean {
        EXIT_OK
    } else {
        diag(format_args!("{} failures", report.failures.len()));
        EXIT_CERTIFICATION
    }
}
