use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x} lies outside the evaluation domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },
    #[error("derivative of order {order} requested but only {available} exact derivatives are available")]
    MissingDerivative { order: usize, available: usize },
    #[error("duplicate node {0} in node set")]
    DuplicateNode(String),
    #[error("step must be nonzero")]
    ZeroStep,
    #[error("unsupported order {0}: only orders 1 and 2 are available")]
    UnsupportedOrder(usize),
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("no admissible (x, h) pairs: {0}")]
    EmptyAdmissibleSet(String),
    #[error("insufficient scales: {found} usable, {required} required")]
    InsufficientScales { found: usize, required: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("windows {0} and {1} overlap")]
    OverlappingWindows(usize, usize),
    #[error("curve leaves the target domain at t = {0}")]
    DomainEscape(f64),
    #[error("normalization violated: {0}")]
    Normalization(String),
    #[error("parse error at position {position}: {message} (near `{token}`)")]
    Parse {
        position: usize,
        token: String,
        message: String,
    },
    #[error("singular linear system")]
    Singular,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
