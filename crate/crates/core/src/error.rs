use thiserror::Error;

/// Errors raised by the verification, estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {value} at position {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("outcome {value} at position {index} is not 0 or 1")]
    InvalidOutcome { index: usize, value: f64 },

    #[error("probabilities and outcomes differ in length ({probabilities} vs {outcomes})")]
    LengthMismatch {
        probabilities: usize,
        outcomes: usize,
    },

    #[error("a forecast series needs at least one pair")]
    EmptySeries,

    #[error("invalid binning scheme: {0}")]
    InvalidBinning(String),

    #[error("inconsistent count summary: {0}")]
    InvalidCounts(String),

    #[error("bias correction is undefined for n = {n} (needs n >= 2)")]
    UndefinedCorrection { n: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid daily series: {0}")]
    InvalidSeries(String),

    #[error("seasonal design matrix is rank deficient")]
    RankDeficient,

    #[error("anomaly series is constant; AR(1) parameters are undefined")]
    ConstantSeries,

    #[error("degenerate forecast: {0}")]
    DegenerateForecast(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
