use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid action distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// Both bilinear forms of a tensor preference vanish, so the ratio is undefined.
    #[error("degenerate preference pair ({a1}, {a2}): both bilinear forms are zero")]
    DegeneratePair { a1: usize, a2: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("cannot fit a model on an empty dataset")]
    EmptyDataset,

    #[error("tensor estimate projected to all zeros")]
    ZeroTensor,

    #[error("log-likelihood is not finite at the starting point")]
    NonFiniteLikelihood,

    #[error("KL divergence undefined: policy puts mass {mass:e} on action {action} outside the reference support")]
    KlUndefined { action: usize, mass: f64 },

    #[error("coverage requires a finite context list; use a finite-context instance")]
    ContinuousContexts,

    #[error("context not found in the instance's finite context list")]
    UnknownContext,

    #[error("evaluation set was built for a different instance")]
    StaleEvalSet,

    #[error("negative step regret {value:e} at round {round} exceeds tolerance {tolerance:e}")]
    NegativeRegret {
        round: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("model variant mismatch: {0}")]
    VariantMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed dataset at line {line}: {message}")]
    MalformedDataset { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{learner}, repetition {repetition}: {source}")]
    Run {
        learner: String,
        repetition: usize,
        source: Box<Error>,
    },
}

impl Error {
    /// Whether the error stems from the configuration rather than a run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
