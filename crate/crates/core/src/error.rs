use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset file not found: {0}")]
    MissingFile(PathBuf),

    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column must hold exactly two distinct values, found {found}: {values:?}")]
    LabelCardinality { found: usize, values: Vec<String> },

    #[error("non-numeric feature at line {line}, column {column:?}: {value:?}")]
    NonNumeric {
        line: usize,
        column: String,
        value: String,
    },

    #[error("missing value at line {line}, column {column:?}")]
    MissingValue { line: usize, column: String },

    #[error("unknown label column {0:?}")]
    UnknownLabelColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("class {label} has {count} samples; at least {required} required")]
    ClassTooSmall {
        label: i8,
        count: usize,
        required: usize,
    },

    #[error("empty input to {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset carries no per-sample memberships")]
    MembershipsAbsent,

    #[error("membership function returned {value} at ball {ball}, outside (0, 1]")]
    MembershipOutOfRange { ball: usize, value: f64 },

    #[error("degenerate dual solution: {0}")]
    DegenerateSolution(String),

    #[error("solver failed to reach the equality constraint: best residual {residual} exceeds tolerance {tolerance}")]
    SolverFailure { residual: f64, tolerance: f64 },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Stable machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "missing_file",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::RaggedRow { .. } => "ragged_row",
            Error::LabelCardinality { .. } => "label_cardinality",
            Error::NonNumeric { .. } => "non_numeric",
            Error::MissingValue { .. } => "missing_value",
            Error::UnknownLabelColumn(_) => "unknown_label_column",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::ClassTooSmall { .. } => "class_too_small",
            Error::EmptyInput(_) => "empty_input",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::MembershipsAbsent => "memberships_absent",
            Error::MembershipOutOfRange { .. } => "membership_out_of_range",
            Error::DegenerateSolution(_) => "degenerate_solution",
            Error::SolverFailure { .. } => "solver_failure",
            Error::Serialization(_) => "serialization",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
