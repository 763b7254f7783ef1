use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical kernels.
///
/// Counterexamples and failed fits are *not* errors; they are ordinary
/// return values of the certificate and probe operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("interval [{lo}, {hi}] lies outside the declared domain [{domain_lo}, {domain_hi}]")]
    Domain {
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },
    #[error("non-finite evaluation at t = {t} (x = {x:?})")]
    Evaluation { t: f64, x: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("matrix is singular or not positive definite: {0}")]
    Singular(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
