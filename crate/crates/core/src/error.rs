use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rule number {0} outside 0..=255")]
    RuleOutOfRange(u32),

    #[error("rule {0} is not one of the 16 MACA rules")]
    NotMacaRule(u8),

    #[error("length mismatch: expected {expected} cells, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("cell {index} value {value} outside [0, 1]")]
    CellOutOfRange { index: usize, value: f64 },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("no attractor reached within {0} steps")]
    NonConvergence(usize),

    #[error("{cells} cells is too many for exhaustive enumeration (max {max})")]
    TooManyCells { cells: usize, max: usize },

    #[error("invalid base {base:?} at offset {offset}")]
    InvalidBase { base: char, offset: usize },

    #[error("window contains N at offset {0}")]
    AmbiguousBase(usize),

    #[error("fasta: {message} at line {line}, column {column}")]
    Fasta {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("model version {found} not supported (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("model file truncated: {0}")]
    ModelTruncated(String),

    #[error("model file malformed: {0}")]
    ModelFormat(String),

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("{0}")]
    Labels(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable short name for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RuleOutOfRange(_) | Error::NotMacaRule(_) => "rule",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::CellOutOfRange { .. } => "cell-range",
            Error::Empty(_) => "empty-input",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NonConvergence(_) => "non-convergence",
            Error::TooManyCells { .. } => "too-many-cells",
            Error::InvalidBase { .. } | Error::AmbiguousBase(_) => "sequence",
            Error::Fasta { .. } => "fasta",
            Error::ModelVersion { .. } => "model-version",
            Error::ModelTruncated(_) => "model-truncated",
            Error::ModelFormat(_) => "model-format",
            Error::ModelInvariant(_) => "model-invariant",
            Error::Labels(_) => "labels",
            Error::Io(_) => "io",
        }
    }
}
