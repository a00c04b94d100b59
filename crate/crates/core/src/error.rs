use thiserror::Error;

/// Errors raised by the numerical routines and samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An exact integer computation did not fit the result type.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    /// A numerical routine failed (non-convergence, kernel inconsistency).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure_domain {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Domain(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_domain;
