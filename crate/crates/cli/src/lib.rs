//! Command-line front end: argument parsing, report assembly and exit codes.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spectral_intervals::{Error, ErrorClass, Execution};

pub use problem::{Problem, ProblemFile};
pub use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => EXIT_VALIDATION,
                ErrorClass::Numerical => EXIT_NUMERICAL,
                ErrorClass::Guard => EXIT_GUARD,
            },
        }
    }

    pub fn class(&self) -> &'static str {
        match self.exit_code() {
            EXIT_NUMERICAL => "numerical",
            EXIT_GUARD => "guard",
            _ => "validation",
        }
    }
}

const AFTER_HELP: &str = "\
CSV columns (--format csv):
  spectrum    lambda,dimension,constant,det_residual,eig_residual
  evolve      x,re,im            (U(t)f sampled at interior points)
  paths       word,direction,remainder,end,re,im
  verify, classify, congruence
              name,status,detail

JSON reports hold the command echo, a SHA-256 digest of the canonical problem
file, named verdicts with witnesses, command results and timing. Complex
numbers are written as [re, im].

Exit codes: 0 ok, 1 validation error, 2 numerical non-convergence,
3 guard exceeded (path or grid cap). The path cap defaults to 1000000 and can
be overridden with SPECTRAL_INTERVALS_MAX_PATHS.";

#[derive(Debug, Parser)]
#[command(name = "spectral-intervals", version, about = "Spectra and unitary groups of d/dx on unions of intervals", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Condition {
    Multiplicative,
    Forelli,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Spectral window [LO, HI]; overrides the problem file.
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
    /// Scan grid step; defaults to 1 / (8 L max(1, |alpha_1|, |beta_n|)).
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
    /// Tolerance for pass/fail checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized trials.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of D_B in a window.
    Spectrum { problem: PathBuf },
    /// Evolve a function by U(t) along admissible paths.
    Evolve {
        problem: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// bump | random | eigenfunction:K | exp:LAMBDA | @atoms.json
        #[arg(long, default_value = "bump")]
        function: String,
        /// Output samples per interval.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Spectrality check, gap criterion, path identities, local translations, unitarity and group law.
    Verify {
        problem: PathBuf,
        /// Random local-translation trials.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Matrix structure and, for spectral (weighted) permutations, the tiling and congruence suites.
    Classify {
        problem: PathBuf,
        /// Equal-length power test for this time.
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, value_enum, default_value_t = Condition::Multiplicative)]
        condition: Condition,
    },
    /// Admissible paths from x over time t and their sums by end point.
    Paths {
        problem: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Lattice tiling, translation congruence and gap decompositions.
    Congruence {
        problem: PathBuf,
        /// Lattice period; defaults to the measure L.
        #[arg(long)]
        modulus: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Evolve { .. } => "evolve",
            Command::Verify { .. } => "verify",
            Command::Classify { .. } => "classify",
            Command::Paths { .. } => "paths",
            Command::Congruence { .. } => "congruence",
        }
    }

    pub fn problem(&self) -> &PathBuf {
        match self {
            Command::Spectrum { problem }
            | Command::Evolve { problem, .. }
            | Command::Verify { problem, .. }
            | Command::Classify { problem, .. }
            | Command::Paths { problem, .. }
            | Command::Congruence { problem, .. } => problem,
        }
    }
}

impl Common {
    pub fn execution(&self) -> Execution {
        if self.jobs == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn configure_threads(jobs: Option<usize>) -> Result<(), CliError> {
    match jobs {
        Some(0) => Err(CliError::Validation("--jobs must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(k) => {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            Ok(())
        }
        _ => Ok(()),
    }
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Validation(format!("stdout: {e}")))
        }
    }
}

/// Runs the tool on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    if let Err(e) = configure_threads(cli.common.jobs) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let problem = match ProblemFile::read(cli.command.problem()).and_then(ProblemFile::validate) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut report = Report::new(cli.command.name(), echo, problem.file.digest());
    let outcome = commands::execute(&cli.command, &cli.common, &problem);
    let code = match &outcome {
        Ok(_) => EXIT_OK,
        Err(e) => e.exit_code(),
    };
    let csv = match outcome {
        Ok(out) => report.fill(out),
        Err(e) => {
            eprintln!("error: {e}");
            report.fail(&e);
            None
        }
    };
    report.finish(start.elapsed());
    let text = match (cli.common.format, csv) {
        (Format::Csv, Some(table)) => table,
        _ => report.to_json(),
    };
    if let Err(e) = emit(&cli.common, &text) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    code
}
