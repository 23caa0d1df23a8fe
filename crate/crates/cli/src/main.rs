//! `frame-erasure`: generate frames and duals, build reduced duals after
//! erasures, simulate transmissions, and run the timing benchmark.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O or malformed input, 4 minimal
//! redundancy condition violated, 5 construction failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frame_erasure::{Error, Field, Method, Tolerances};

#[derive(Debug, Parser)]
#[command(
    name = "frame-erasure",
    version,
    about = "Dual frames compensating for erased coefficients"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "FRAME_ERASURE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Relative singular value cutoff for numerical rank.
    #[arg(long = "tol-rank", global = true, default_value_t = 1e-10)]
    pub tol_rank: f64,
    /// Bound on ||Z X^H - I||_2 accepted as a dual.
    #[arg(long = "tol-dual", global = true, default_value_t = 1e-9)]
    pub tol_dual: f64,
    /// Iterative denominators at or below this magnitude count as zero.
    #[arg(long = "tol-denom", global = true, default_value_t = 1e-12)]
    pub tol_denom: f64,
    /// Scalar field. Commands reading files follow the files unless this asks for complex.
    #[arg(long, global = true, value_enum)]
    pub field: Option<FieldArg>,
    /// Kernel threads. Only single-threaded kernels are built in.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

impl GlobalOpts {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rank: self.tol_rank,
            duality: self.tol_dual,
            denominator: self.tol_denom,
            ..Tolerances::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DualKind {
    Canonical,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Iter,
    Gram,
    Op,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Iter => Method::Iterative,
            MethodArg::Gram => Method::GramSolve,
            MethodArg::Op => Method::OperatorInverse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceMethodArg {
    Iter,
    Gram,
    Op,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random frame, and optionally a dual, as FRM1 files.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        dual: Option<DualKind>,
        /// Scale of the random component of a random dual.
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        /// Dual output path; defaults to `<out stem>.dual.frm`.
        #[arg(long = "dual-out")]
        dual_out: Option<PathBuf>,
    },
    /// Print shape, rank and frame bounds of an FRM1 file as JSON.
    Info {
        #[arg(long)]
        frame: PathBuf,
    },
    /// Print the duality error of a frame/dual pair as JSON.
    Verify {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        dual: PathBuf,
    },
    /// Build a dual of the reduced frame after erasing the given indices.
    Reduce {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        dual: PathBuf,
        /// Comma separated 1-based indices, in traversal order.
        #[arg(long)]
        erase: String,
        #[arg(long, value_enum)]
        method: ReduceMethodArg,
        /// Output FRM1 path (the sidecar goes to `<out>.json`). With
        /// `--method all` the equivalence report is written here instead.
        #[arg(long, required_if_eq_any([("method", "iter"), ("method", "gram"), ("method", "op")]))]
        out: Option<PathBuf>,
        /// Agreement tolerance for `--method all`.
        #[arg(long = "tol-equal", default_value_t = 1e-8)]
        tol_equal: f64,
    },
    /// Simulate transmissions with erasures and report reconstruction errors as JSON.
    Transmit {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        dual: PathBuf,
        /// Comma separated 1-based indices.
        #[arg(long, conflicts_with_all = ["batch", "k"])]
        erase: Option<String>,
        /// Signal file: whitespace separated entries.
        #[arg(long, conflicts_with = "random_signal")]
        signal: Option<PathBuf>,
        #[arg(long = "random-signal")]
        random_signal: bool,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Number of trials with random erasures of size `--k`; emits JSON lines.
        #[arg(long, requires = "k")]
        batch: Option<usize>,
        #[arg(long, requires = "batch")]
        k: Option<usize>,
    },
    /// Time the constructions against the pseudo-inverse baseline and write CSV.
    Bench {
        /// JSON file with one config object or a list of them.
        #[arg(long, conflicts_with_all = ["n", "r", "k"])]
        config: Option<PathBuf>,
        #[arg(long, requires_all = ["r", "k"])]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::InvalidErasure(_) | Error::BadK { .. } | Error::Config(_) => 2,
            Error::MrcViolated | Error::MrcRetryExhausted { .. } => 4,
            e if e.is_construction_failure() => 5,
            _ => 3,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
