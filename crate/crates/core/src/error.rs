use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A property that must hold for correct engine output was violated.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// A computation exceeded its time or size budget.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Process exit code used by the command-line tool.
    ///
    /// 2 covers invalid arguments, 3 data and format problems, 4 numeric or
    /// resource failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 2,
            Error::InvariantViolation(_) | Error::Format(_) | Error::Io(_) | Error::Json(_) => 3,
            Error::Numeric(_) | Error::Resource(_) | Error::Generation(_) => 4,
        }
    }
}
