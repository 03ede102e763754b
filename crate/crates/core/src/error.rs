use thiserror::Error;

use crate::certificate::CertificateNode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed text in the rational or certificate formats.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configured size cap would be exceeded.
    #[error("capacity error: {what} exceeds the cap of {cap}")]
    Capacity { what: String, cap: u128 },

    /// Exact arithmetic would leave the 64-bit range.
    #[error("arithmetic capacity exceeded: {0}")]
    Overflow(String),

    /// A certified bound exceeded the exact size it bounds.
    #[error("bound violation: {0}")]
    BoundViolation(String),

    /// The tail hypothesis failed at a node where no class satisfied the
    /// recursion condition.
    #[error("certification failure at level {}: {message}", node.level)]
    CertificationFailure {
        message: String,
        node: Box<CertificateNode>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(what: impl Into<String>, cap: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            cap,
        }
    }

    /// Process exit status for the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Parse { .. } => 1,
            Error::Capacity { .. } | Error::Overflow(_) => 2,
            Error::CertificationFailure { .. } | Error::BoundViolation(_) => 3,
        }
    }
}
