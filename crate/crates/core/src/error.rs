use thiserror::Error;

/// Errors produced by the simulation and analysis engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("opinion {index} has norm {norm}, expected 1")]
    NotUnitNorm { index: usize, norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate update: |w| = {norm:e} for agent {influenced} influenced by {influencer}")]
    DegenerateUpdate {
        influenced: usize,
        influencer: usize,
        norm: f64,
    },

    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("configuration admits no cluster partition: {0}")]
    NotClusterable(String),

    #[error("zero correlation among agents ({0}, {1}, {2})")]
    ZeroSign(usize, usize, usize),

    #[error("no nonzero cross-cluster pair")]
    NoCrossPair,

    #[error("iteration from {x0} cannot reach {target}")]
    NonConvergent { x0: f64, target: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("kernel violation at step {step}: {detail}")]
    KernelViolation { step: u64, detail: String },

    #[error("bad file: {0}")]
    BadFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::BadFile(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::BadFile(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::BadFile(e.to_string())
    }
}
