use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not a probability distribution: {0}")]
    Distribution(String),

    #[error("channel format error: {0}")]
    Format(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
