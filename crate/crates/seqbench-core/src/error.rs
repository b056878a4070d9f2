//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by the engine.
///
/// Variants are coarse on purpose: callers either report the message or
/// branch on the class of failure, never on details inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Tensor dimensions do not conform for the requested operation.
    Shape(String),
    /// An argument or input violates a documented precondition
    /// (non-binary labels, out-of-range ids, negative elapsed time, ...).
    Invalid(String),
    /// A NaN or infinity was produced or supplied; names the offender.
    NonFinite(String),
    /// A numerical procedure failed to converge or became singular.
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::Numeric(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
