use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integrand of a local functional has a nonzero constant term")]
    ConstantTerm,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),
    #[error("dimension constraint violated: {0}")]
    Dimension(String),
    #[error("omega table has no entry ({0}, {1})")]
    MissingOmega(u32, u32),
    #[error("correlator not reachable inside the working bound: {0}")]
    Unreachable(String),
    #[error("nonzero residual: {0}")]
    NonzeroResidual(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
