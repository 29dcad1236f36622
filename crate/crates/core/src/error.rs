use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pulse {index} has non-positive duration {duration}")]
    NonPositiveDuration { index: usize, duration: f64 },

    #[error("pulse {index} starts at {start} before the previous pulse ends at {prev_end}")]
    Overlap {
        index: usize,
        start: f64,
        prev_end: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("negative gap {0}")]
    NegativeGap(f64),

    #[error("inconsistent parameter counts: {0}")]
    InconsistentCounts(String),

    #[error("empty segment list")]
    EmptySegments,

    #[error("invalid trap configuration: {0}")]
    InvalidTrap(String),

    #[error("mean conditional phase {0} is not positive; cannot normalize with a real scale")]
    NotNormalizable(f64),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureTolerance { tol: f64, estimate: f64 },

    #[error("no interior minimum of |theta+|^2 in the frequency window [{lo}, {hi}]")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
