use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha = {0} is outside [0, 1]; fiber maps would not be monotone")]
    AlphaOutOfRange(f64),

    #[error("orbit became non-finite after {step} steps from (theta, x) = ({theta}, {x})")]
    NonFinite { step: usize, theta: f64, x: f64 },

    #[error("epsilon grid spacing {spacing:e} is below 4 x error radius {error_radius:e}")]
    GridTooCoarse { spacing: f64, error_radius: f64 },

    #[error("graphs live on different grids ({0} vs {1} points)")]
    GridMismatch(usize, usize),

    #[error("bracket [{lo}, {hi}] does not straddle the transition")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("tridiagonal eigen-solve did not converge at index {0}")]
    EigenFailure(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
