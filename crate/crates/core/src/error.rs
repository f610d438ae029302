use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("no unit found with coefficients below {0}")]
    UnitSearchExhausted(u64),
    #[error("element is not totally positive: {0}")]
    NotTotallyPositive(String),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("truncation degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("quadrature did not converge: estimated error {estimate:e} above tolerance {tolerance:e}")]
    NonConvergence { estimate: f64, tolerance: f64 },
    #[error("endpoint mismatch between concatenated paths")]
    EndpointMismatch,
    #[error("form does not vanish at the cusp: {0}")]
    NoDecay(String),
    #[error("repeated cusp points")]
    RepeatedCusps,
    #[error("degenerate diangle")]
    DegenerateDiangle,
    #[error("point maps to the boundary")]
    Boundary,
    #[error("divergent sum: {0}")]
    Divergence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
