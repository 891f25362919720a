use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("vertex '{label}' has nonpositive measure {mu}")]
    NonPositiveMeasure { label: String, mu: f64 },

    #[error("edge {a}-{b} has nonpositive weight {weight}")]
    NonPositiveWeight { a: String, b: String, weight: f64 },

    #[error("self-loop at vertex '{label}'")]
    SelfLoop { label: String },

    #[error("edge {a}-{b} declared twice")]
    DuplicateEdge { a: String, b: String },

    #[error("duplicate vertex label '{label}'")]
    DuplicateVertex { label: String },

    #[error("edge endpoint index {index} out of range for {n} vertices")]
    UnknownVertex { index: usize, n: usize },

    #[error("graph is disconnected: no path between '{a}' and '{b}'")]
    Disconnected { a: String, b: String },

    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("invalid homotopy parameters: {0}")]
    InvalidHomotopy(String),

    #[error("exponent {exponent:.3} at vertex {vertex} exceeds the cap {cap}")]
    ExponentOverflow { vertex: usize, exponent: f64, cap: f64 },

    #[error("energy functional is only defined for the generalized equation")]
    UnsupportedFunctional,

    #[error("a priori bounds inapplicable: {0}")]
    BoundsInapplicable(String),

    #[error("barrier construction inapplicable: {0}")]
    BarrierInapplicable(String),

    #[error("box minimizer touches the constraint at vertex {vertex} (value {value})")]
    InteriorViolation { vertex: usize, value: f64 },

    #[error("continuation broken at t = {t} (last solved t = {reached})")]
    ContinuationBroken { t: f64, reached: f64 },

    #[error("multiplicity search failed: {0}")]
    MultiplicityFailure(String),

    #[error("degenerate root: jacobian determinant vanishes at root with residual {residual:e}")]
    DegenerateRoot { residual: f64 },

    #[error("integral obstruction: no solution exists")]
    NoSolution,

    #[error("solver did not converge: {0}")]
    NotConverged(String),
}

impl Error {
    /// Errors caused by malformed input data rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension { .. }
                | Error::NonFinite { .. }
                | Error::EmptyGraph
                | Error::NonPositiveMeasure { .. }
                | Error::NonPositiveWeight { .. }
                | Error::SelfLoop { .. }
                | Error::DuplicateEdge { .. }
                | Error::DuplicateVertex { .. }
                | Error::UnknownVertex { .. }
                | Error::Disconnected { .. }
                | Error::InvalidSpec(_)
                | Error::InvalidHomotopy(_)
                | Error::BoundsInapplicable(_)
                | Error::BarrierInapplicable(_)
                | Error::UnsupportedFunctional
        )
    }
}
