use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bad shape: {0}")]
    BadShape(String),

    #[error("not a frame: numerical rank {rank} is below the dimension {dim}")]
    NotAFrame { rank: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("not a dual frame: duality residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotADual { residual: f64, tolerance: f64 },

    #[error("operation requires the canonical dual")]
    NotCanonical,

    #[error("frame operator factorization failed: {0}")]
    FactorizationFailed(String),

    #[error("invalid erasure set: {0}")]
    InvalidErasure(String),

    #[error(
        "minimal redundancy condition violated: the surviving frame elements do not span the space"
    )]
    MrcViolated,

    #[error("denominator vanishes at step {step}: |1 - <v, x>| = {value:e}")]
    DenominatorVanishes { step: usize, value: f64 },

    #[error("singular Gram matrix: smallest/largest singular value = {relative_sigma_min:e}")]
    SingularGram { relative_sigma_min: f64 },

    #[error("singular operator I - sum theta(z_i, x_i): smallest/largest singular value = {relative_sigma_min:e}")]
    SingularOperator { relative_sigma_min: f64 },

    #[error("erasure size k = {k} must satisfy 1 <= k < N = {n}")]
    BadK { n: usize, k: usize },

    #[error("no frame satisfying the minimal redundancy condition after {attempts} attempts")]
    MrcRetryExhausted { attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O failure: {0}")]
    Io(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Stable short name used in reports and CSV status cells.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BadShape(_) => "BadShape",
            Error::NotAFrame { .. } => "NotAFrame",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite => "NonFinite",
            Error::NotADual { .. } => "NotADual",
            Error::NotCanonical => "NotCanonical",
            Error::FactorizationFailed(_) => "FactorizationFailed",
            Error::InvalidErasure(_) => "InvalidErasure",
            Error::MrcViolated => "MrcViolated",
            Error::DenominatorVanishes { .. } => "DenominatorVanishes",
            Error::SingularGram { .. } => "SingularGram",
            Error::SingularOperator { .. } => "SingularOperator",
            Error::BadK { .. } => "BadK",
            Error::MrcRetryExhausted { .. } => "MrcRetryExhausted",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
            Error::Parse { .. } => "Parse",
        }
    }

    /// True for the failures a reduced-dual construction can report.
    pub fn is_construction_failure(&self) -> bool {
        matches!(
            self,
            Error::DenominatorVanishes { .. }
                | Error::SingularGram { .. }
                | Error::SingularOperator { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}
