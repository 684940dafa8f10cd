use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a sample needs at least one stratum")]
    EmptySample,

    #[error("stratum {label:?}: weight {weight} must be positive and finite")]
    InvalidWeight { label: String, weight: f64 },

    #[error("stratum {label:?}: value {value} is not finite")]
    NonFiniteValue { label: String, value: f64 },

    #[error("no Hadamard matrix of order {0} can be built (supported: 1, 2, Sylvester doublings and Paley constructions)")]
    UnconstructibleOrder(usize),

    #[error("need {needed} zero-sum columns but the order-{order} matrix has only {available}")]
    InsufficientBalancedColumns {
        order: usize,
        needed: usize,
        available: usize,
    },

    #[error("not a sign matrix: {0}")]
    InvalidSignMatrix(String),

    #[error("perturbation factor {0} is outside (0, 1]")]
    EpsilonOutOfRange(f64),

    #[error("scheme {scheme} cannot be used here: {reason}")]
    SchemeMismatch { scheme: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("paired jackknife needs an even number of replicates, got {0}")]
    OddReplicateCount(usize),

    #[error("delete-a-group jackknife needs at least 2 zones, got {0}")]
    TooFewZones(usize),

    #[error("every stratum contrast is zero; degrees of freedom are undefined")]
    DegenerateContrasts,

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("degrees of freedom {0} must be positive")]
    InvalidDegreesOfFreedom(f64),

    #[error("stratum {0:?} does not have both psu 1 and psu 2")]
    MissingPair(String),

    #[error("line {line}: stratum {label:?} repeats psu {psu}")]
    DuplicatePsu { line: u64, label: String, psu: u8 },

    #[error("line {line}: weight {weight} is not positive")]
    NonPositiveWeight { line: u64, weight: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line tool. 1 is reserved for
    /// unexpected failures and 2 for argument errors reported by clap.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingPair(_)
            | Error::DuplicatePsu { .. }
            | Error::NonPositiveWeight { .. }
            | Error::Parse { .. }
            | Error::EmptySample
            | Error::InvalidWeight { .. }
            | Error::NonFiniteValue { .. } => 3,
            Error::Config { .. } => 4,
            Error::UnconstructibleOrder(_)
            | Error::InsufficientBalancedColumns { .. }
            | Error::InvalidSignMatrix(_) => 5,
            Error::EpsilonOutOfRange(_)
            | Error::SchemeMismatch { .. }
            | Error::InvalidProbability(_)
            | Error::InvalidDegreesOfFreedom(_) => 6,
            Error::Io { .. } => 7,
            Error::DegenerateContrasts
            | Error::DimensionMismatch(_)
            | Error::OddReplicateCount(_)
            | Error::TooFewZones(_)
            | Error::Json(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
