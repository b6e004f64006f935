//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised while parsing definitions or evaluating the semantics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input text.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        /// 1-based line number.
        line: usize,
        /// 1-based column number.
        col: usize,
        /// Human readable description.
        msg: String,
    },
    /// A schema-level violation (unknown predicate, arity mismatch, overlapping schemas).
    #[error("schema error: {0}")]
    Schema(String),
    /// A constraint or query violates the safety conditions of the language.
    #[error("safety violation: {0}")]
    Safety(String),
    /// The request is well formed but refused by the semantics (cyclic graph,
    /// non-import system passed to the import solver, unsupported constraint shape).
    #[error("refused: {0}")]
    Refused(String),
    /// A search space exceeded its configured cap.
    #[error("resource cap exceeded: {what} needs {required}, cap is {cap}")]
    Resource {
        /// What was being enumerated.
        what: String,
        /// Configured cap.
        cap: u128,
        /// Size the computation would have needed.
        required: u128,
    },
}

impl Error {
    /// Build a parse error.
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Schema(_) | Error::Safety(_) => 2,
            Error::Refused(_) => 1,
            Error::Resource { .. } => 3,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
