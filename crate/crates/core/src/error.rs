use thiserror::Error;

/// A failed elementary operation, raised by [`crate::jet::Scalar`] implementations.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainError {
    pub op: &'static str,
    pub arg: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("variable `{name}` out of range for dimension {dim}")]
    VariableOutOfRange { name: String, dim: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("domain error: {op}({arg}) in `{context}`")]
    Domain {
        op: &'static str,
        arg: f64,
        context: String,
    },

    #[error("evaluation failed at x={x:?}, y={y:?}: {source}")]
    AtPoint {
        x: Vec<f64>,
        y: Vec<f64>,
        source: Box<Error>,
    },

    #[error("{what} is singular ({detail})")]
    Singular { what: String, detail: String },

    #[error("{what} is not positive definite at x={x:?}")]
    NotPositiveDefinite { what: String, x: Vec<f64> },

    #[error("direction outside the regular domain: |s| = {s} >= {limit} (extremal direction beta = +-b0 alpha)")]
    ExtremalDirection { s: f64, limit: f64 },

    #[error("finite-difference step underflow near the domain boundary")]
    StepUnderflow,

    #[error("requested derivative order {0} exceeds the engine maximum")]
    OrderTooHigh(usize),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("ODE integration: {0}")]
    Ode(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("catalog: {0}")]
    Catalog(String),
}

impl Error {
    pub fn at_point(self, x: &[f64], y: &[f64]) -> Error {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint {
                x: x.to_vec(),
                y: y.to_vec(),
                source: Box::new(e),
            },
        }
    }

    /// Strips [`Error::AtPoint`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
