use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample needs at least 2 values, got {n}")]
    EmptyOrTiny { n: usize },
    #[error("value {value} at index {index} is not strictly positive")]
    NonPositive { index: usize, value: f64 },
    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("tail fraction k={k} outside [{min}, {max}]")]
    KOutOfRange { k: usize, min: usize, max: usize },
    #[error("regression fits need k >= 2, got k={k}")]
    KTooSmall { k: usize },
    #[error("second-order parameter must be finite and < 0, got {0}")]
    InvalidRho(f64),
    #[error("ridge penalty must be >= 0, got {0}")]
    NegativePenalty(f64),
    #[error("log-spacing {index} is negative or not finite ({value})")]
    InvalidSpacing { index: usize, value: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("mse values must be finite and >= 0 (k={k}, mse={mse})")]
    InvalidMse { k: usize, mse: f64 },
    #[error("tail is degenerate: moment statistics vanish")]
    DegenerateTail,
    #[error("rho grid is empty or contains non-negative entries")]
    GridEmpty,
    #[error("k window [{lo}, {hi}] is empty for n={n}")]
    WindowTooSmall { lo: usize, hi: usize, n: usize },
    #[error("probability {0} outside [0, 1)")]
    UOutOfRange(f64),
    #[error("parameter {name} must be finite and > 0, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("model mean gamma + b*C_j is not positive at j={j} ({mean})")]
    NonPositiveMean { j: usize, mean: f64 },
    #[error("no estimators selected")]
    EmptyEstimatorSet,
    #[error("true gamma must be > 0, got {0}")]
    NonPositiveTrueGamma(f64),
    #[error("need at least {min} replications, got {reps}")]
    TooFewReps { reps: usize, min: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("at k={k}: {source}")]
    AtK { k: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_k(self, k: usize) -> Self {
        match self {
            e @ Error::AtK { .. } => e,
            e => Error::AtK { k, source: Box::new(e) },
        }
    }
}
