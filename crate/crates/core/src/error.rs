use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid feature schema: {0}")]
    Schema(String),

    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("line {line}: state has {found} values, schema expects {expected}")]
    RecordDimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: episode '{episode}' expected step {expected}, found {found}")]
    NonConsecutiveStep {
        line: usize,
        episode: String,
        expected: u64,
        found: u64,
    },

    #[error("line {line}: episode '{episode}' has a record after its terminal record")]
    RecordAfterTerminal { line: usize, episode: String },

    #[error("line {line}: fatal record is not terminal")]
    FatalNotTerminal { line: usize },

    #[error("invalid log: {0}")]
    InvalidLog(String),

    #[error("log contains no states")]
    EmptyLog,

    #[error("state has {found} values, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("epsilon must be a positive finite number, got {0}")]
    InvalidEpsilon(f64),

    #[error("unsupported metric '{0}'")]
    UnsupportedMetric(String),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unsupported graph file version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: String },

    #[error("learning rate must lie in (0, 1), got {0}")]
    InvalidLearningRate(f64),

    #[error("depth must be at least 1")]
    InvalidDepth,

    #[error("invalid fit options: {0}")]
    InvalidFitOptions(String),

    #[error("graph has no {0} risk labeling")]
    MissingRisk(&'static str),

    #[error("invalid perturbation spec: {0}")]
    InvalidPerturbation(String),

    #[error("every perturbation landed on an invalid state")]
    NoValidPerturbations,

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used in machine-readable CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(_) => "schema",
            Error::MalformedRecord { .. } => "malformed_record",
            Error::RecordDimension { .. } | Error::DimensionMismatch { .. } => {
                "dimension_mismatch"
            }
            Error::NonConsecutiveStep { .. } => "non_consecutive_step",
            Error::RecordAfterTerminal { .. } => "record_after_terminal",
            Error::FatalNotTerminal { .. } => "fatal_not_terminal",
            Error::InvalidLog(_) => "invalid_log",
            Error::EmptyLog => "empty_log",
            Error::InvalidEpsilon(_) => "invalid_epsilon",
            Error::UnsupportedMetric(_) => "unsupported_metric",
            Error::EmptyGraph => "empty_graph",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::InvalidLearningRate(_) => "invalid_learning_rate",
            Error::InvalidDepth => "invalid_depth",
            Error::InvalidFitOptions(_) => "invalid_fit_options",
            Error::MissingRisk(_) => "missing_risk",
            Error::InvalidPerturbation(_) => "invalid_perturbation",
            Error::NoValidPerturbations => "no_valid_perturbations",
            Error::InvalidMap(_) => "invalid_map",
            Error::InvalidTrace(_) => "invalid_trace",
            Error::InvalidImage(_) => "invalid_image",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
