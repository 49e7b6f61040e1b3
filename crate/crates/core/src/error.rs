use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two atoms share a position; indices are 1-based.
    #[error("singular geometry: atoms {0} and {1} coincide")]
    SingularGeometry(usize, usize),

    /// Two atoms came closer than the abort radius; indices are 1-based.
    #[error("trajectory aborted at t = {t} us: atoms {a} and {b} closer than {r_min} um")]
    Collision { t: f64, a: usize, b: usize, r_min: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
