use thiserror::Error;

/// Errors produced by the library. Every variant carries enough context to
/// be reported as a machine-parsable record by the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("normal vector is not unit length (norm {norm})")]
    NonUnitNormal { norm: f64 },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weights length {weights} does not match point count {points}")]
    WeightLength { weights: usize, points: usize },

    #[error("negative weight {weight} at index {index}; use PointSet::two_class for signed weights")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("need at least 2 points for a matching, found {0}")]
    TooFewPoints(usize),

    #[error("exact matching refuses {n} points (cap {cap}); use greedy mode or raise the cap")]
    ExactCapExceeded { n: usize, cap: usize },

    #[error("coloring covers {coloring} points but the point set has {points}")]
    ColoringSize { coloring: usize, points: usize },

    #[error("evaluation net is empty")]
    EmptyNet,

    #[error("degenerate restricted object: {0}")]
    DegenerateObject(String),

    #[error("unsupported dimension {dim} for {what}")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short stable identifier used in JSON error records and FFI codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonUnitNormal { .. } => "non_unit_normal",
            Error::EmptyPointSet => "empty_point_set",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::WeightLength { .. } => "weight_length",
            Error::NegativeWeight { .. } => "negative_weight",
            Error::TooFewPoints(_) => "too_few_points",
            Error::ExactCapExceeded { .. } => "exact_cap_exceeded",
            Error::ColoringSize { .. } => "coloring_size",
            Error::EmptyNet => "empty_net",
            Error::DegenerateObject(_) => "degenerate_object",
            Error::UnsupportedDimension { .. } => "unsupported_dimension",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
