use thiserror::Error;

/// Errors produced anywhere in the classification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input characteristic {row} of object {object} is not strictly positive ({value})")]
    NonPositiveInput { row: usize, object: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {matrix} at row {row}, object {object}")]
    NonFiniteEntry {
        matrix: &'static str,
        row: usize,
        object: usize,
    },

    #[error("object {object} is not a member of the category")]
    ObjectNotInCategory { object: usize },

    #[error("explicit uncertainty matrix for row {row} has {found} columns, category has {expected}")]
    BadExplicitShape { row: usize, expected: usize, found: usize },

    #[error("explicit uncertainty matrices are tied to one category and cannot be used while categories change")]
    ExplicitSpecInSearch,

    #[error("invalid uncertainty specification: {0}")]
    InvalidUncertainty(String),

    #[error("object {object} did not reach robust efficiency before sigma reached {sigma_max:e}")]
    CapabilityNotReached { object: usize, sigma_max: f64 },

    #[error("cannot split {objects} objects into {categories} categories of at least two")]
    InfeasibleSizes { objects: usize, categories: usize },

    #[error("binary program is infeasible")]
    InfeasibleBinaryProgram,

    #[error("conic solve failed: {0}")]
    Solver(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("parse error at data row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
