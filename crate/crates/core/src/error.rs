use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("alphabet too large for brute force: {size} points (max {max})")]
    AlphabetTooLarge { size: usize, max: usize },

    #[error("trajectory diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("no lag up to {max_lag} has |rho| <= {threshold}; smallest |rho| = {min_abs_rho} at lag {argmin}")]
    NoDecorrelatingLag {
        max_lag: usize,
        threshold: f64,
        min_abs_rho: f64,
        argmin: usize,
        rho: Vec<f64>,
    },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("trajectory too short: requested {requested} samples, achievable {achievable}")]
    TrajectoryTooShort { requested: usize, achievable: usize },

    #[error("NaN input")]
    NanInput,

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("frame: bad magic {0:02x?}")]
    BadMagic([u8; 4]),

    #[error("frame: unsupported version {0}")]
    BadVersion(u8),

    #[error("frame: unknown type 0x{0:02x}")]
    UnknownFrameType(u8),

    #[error("frame: truncated header ({got} of {needed} bytes)")]
    TruncatedHeader { got: usize, needed: usize },

    #[error("frame: truncated payload ({got} of {declared} bytes)")]
    TruncatedPayload { got: usize, declared: usize },

    #[error("frame: malformed {kind} payload: {reason}")]
    MalformedPayload { kind: &'static str, reason: String },

    #[error("trajectory file: {0}")]
    TrajectoryFormat(String),

    #[error("schema error in {context}: {source}")]
    Schema {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("solver did not converge within {iterations} iterations (kkt residual {kkt_residual:e})")]
    NotConverged { iterations: usize, kkt_residual: f64 },

    #[error("failed checks: {}", .0.join(", "))]
    CheckFailed(Vec<String>),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 1 validation, 2 non-convergence or failed
    /// check, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::NotConverged { .. } | Error::CheckFailed(_) | Error::NoDecorrelatingLag { .. } => 2,
            Error::Io(_) => 3,
            Error::Csv(e) if e.is_io_error() => 3,
            _ => 1,
        }
    }

    pub(crate) fn schema(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Schema {
            context: context.into(),
            source,
        }
    }
}
