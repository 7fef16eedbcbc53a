use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A plaintext or intermediate value does not fit its declared range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Discrete log not found within the configured bound. Usually means
    /// the fixed-point scales were mis-sized for the decryption bound.
    #[error("plaintext outside the decryptable range [-{bound}, {bound}]")]
    Range { bound: u64 },

    /// Homomorphic operands disagree on level, key, or scale.
    #[error("homomorphism mismatch: {0}")]
    Homomorphism(String),

    #[error("delegation error: {0}")]
    Delegation(String),

    #[error("decoder error: {0}")]
    Decoder(String),

    #[error("malformed encoding: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}
