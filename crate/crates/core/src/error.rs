use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("target index {0} out of range (grid has 24 targets)")]
    InvalidTarget(usize),

    #[error("discrete action {0} out of range (9 actions)")]
    InvalidAction(usize),

    #[error("environment must be reset before stepping")]
    NotReset,

    #[error("cannot step a terminated run; call reset first")]
    TerminalStep,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("forward cache is stale: parameters changed since the forward pass")]
    StaleCache,

    #[error("non-finite gradient, update skipped")]
    NonFiniteGradient,

    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,

    #[error("invalid metric input: {0}")]
    Metric(String),

    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error("serialization failed: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<bincode::Error> for Error {
    fn from(e: bincode::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::InvalidConfig(e.to_string())
    }
}
