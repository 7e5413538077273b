use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed checkpoint header: {0}")]
    MalformedHeader(String),

    #[error("unknown tensor `{0}`")]
    UnknownTensor(String),

    #[error("duplicate tensor `{0}`")]
    DuplicateTensor(String),

    #[error("tensor `{name}` has dtype {dtype}, which cannot be merged")]
    UnsupportedDtype { name: String, dtype: String },

    #[error("shape mismatch for `{name}`: {left:?} vs {right:?}")]
    ShapeMismatch {
        name: String,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("dtype mismatch for `{name}`: {left} vs {right}")]
    DtypeMismatch {
        name: String,
        left: String,
        right: String,
    },

    #[error("tensor sets differ (only in first: {only_in_first:?}; only in second: {only_in_second:?})")]
    TensorSetMismatch {
        only_in_first: Vec<String>,
        only_in_second: Vec<String>,
    },

    #[error("invalid merge recipe: {0}")]
    InvalidRecipe(String),

    #[error("empty input")]
    EmptyInput,

    #[error("records span several tasks: {0:?}")]
    MixedTasks(Vec<String>),

    #[error("confidence {value} outside [0, 1]")]
    InvalidConfidence { value: f64 },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: confidence {value} outside [0, 1]")]
    ConfidenceOutOfRange { line: usize, value: f64 },

    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("duplicate summary entry for model `{model_id}`, lambda {lambda}, task `{task}`")]
    DuplicateKey {
        model_id: String,
        lambda: f64,
        task: String,
    },

    #[error("bundle `{model_id}` task `{task}`: accuracy from records {from_records:.4} disagrees with summary {from_summary:.4}")]
    InconsistentBundle {
        model_id: String,
        task: String,
        from_records: f64,
        from_summary: f64,
    },

    #[error("point at lambda {lambda} lacks task `{task}`")]
    MissingTask { lambda: f64, task: String },

    #[error("sweep lacks parent points (lambda = 0 and lambda = 1)")]
    MissingParents,

    #[error("sweep needs both parents and at least {needed} interior points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("merge failed for lambda values {0:?}")]
    SweepFailed(Vec<f64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable token identifying the error kind. Printed by the CLI and mirrored
    /// by the C status codes.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IO_ERROR",
            Error::MalformedHeader(_) => "MALFORMED_HEADER",
            Error::UnknownTensor(_) => "UNKNOWN_TENSOR",
            Error::DuplicateTensor(_) => "DUPLICATE_TENSOR",
            Error::UnsupportedDtype { .. } => "UNSUPPORTED_DTYPE",
            Error::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            Error::DtypeMismatch { .. } => "DTYPE_MISMATCH",
            Error::TensorSetMismatch { .. } => "TENSOR_SET_MISMATCH",
            Error::InvalidRecipe(_) => "INVALID_RECIPE",
            Error::EmptyInput => "EMPTY_INPUT",
            Error::MixedTasks(_) => "MIXED_TASKS",
            Error::InvalidConfidence { .. } => "INVALID_CONFIDENCE",
            Error::MalformedLine { .. } => "MALFORMED_LINE",
            Error::ConfidenceOutOfRange { .. } => "CONFIDENCE_OUT_OF_RANGE",
            Error::MalformedRow { .. } => "MALFORMED_ROW",
            Error::DuplicateKey { .. } => "DUPLICATE_KEY",
            Error::InconsistentBundle { .. } => "INCONSISTENT_BUNDLE",
            Error::MissingTask { .. } => "MISSING_TASK",
            Error::MissingParents => "MISSING_PARENTS",
            Error::TooFewPoints { .. } => "TOO_FEW_POINTS",
            Error::InvalidSweep(_) => "INVALID_SWEEP",
            Error::SweepFailed(_) => "SWEEP_FAILED",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Serialization(_) => "SERIALIZATION",
        }
    }
}
