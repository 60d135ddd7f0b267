use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter exceeds a documented capacity cap.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An intermediate integer product or sum would wrap. Checked arithmetic
    /// turns overflow into this error instead of silently wrapping.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    /// Checkpoint file is corrupt, tampered with, or belongs to another job.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn checkpoint(msg: impl Into<String>) -> Self {
        Error::Checkpoint(msg.into())
    }
}
