use thiserror::Error;

/// Errors raised by the tensor, field and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("metric is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{what} is not symmetric (relative asymmetry {asymmetry:e})")]
    Asymmetric { what: &'static str, asymmetry: f64 },

    #[error("degenerate plane: vectors are nearly dependent (normalized Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },

    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("metric is not positive definite at point {point:?}")]
    NotSpdAtPoint { point: Vec<f64> },

    #[error("family is not normalized at {point:?}: total probability {total}")]
    NotNormalized { point: Vec<f64>, total: f64 },

    #[error("non-positive probability for outcome {outcome} at {point:?}")]
    NonPositiveProbability { outcome: usize, point: Vec<f64> },

    #[error("Fisher information is singular at {point:?}")]
    SingularFisher { point: Vec<f64> },

    #[error("operators do not commute: bracket norm {norm:e} exceeds {tol:e}")]
    NotCommuting { norm: f64, tol: f64 },

    #[error("product is not associative: bracket norm {norm:e} exceeds {tol:e}")]
    NotAssociative { norm: f64, tol: f64 },

    #[error("cluster refinement failed: eigenvalue gap {gap:e} could not be resolved")]
    ClusterRefinement { gap: f64 },

    #[error("negative discriminant at index {index}: lambda^2 - 4A = {value:e}")]
    DiscriminantNegative { index: usize, value: f64 },

    #[error("sphere maximization failed after {restarts} restarts: {reason}")]
    MaximizationFailed { restarts: usize, reason: String },

    #[error("K is degenerate: |lambda_{index}| = {value:e}")]
    Degenerate { index: usize, value: f64 },

    #[error("unit metric B is singular (|det B| = {det:e})")]
    SingularB { det: f64 },

    #[error("point {point:?} is within {margin:e} of a coth pole: {argument}")]
    SingularPoint { point: Vec<f64>, argument: String, margin: f64 },

    #[error("field `{field}`: {source}")]
    Config { field: String, source: Box<Error> },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Wraps an error with the configuration field it came from.
    pub fn in_field(self, field: impl Into<String>) -> Error {
        Error::Config { field: field.into(), source: Box::new(self) }
    }

    /// True for errors caused by malformed configuration or expressions, as
    /// opposed to failures while evaluating a well-formed chart.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Syntax { .. } | Error::UnknownVariable { .. } | Error::UnknownFunction { .. } | Error::Invalid(_) => true,
            Error::Config { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
