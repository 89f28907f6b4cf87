use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph generation failed: {0}")]
    GraphGeneration(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("exhaustive search is limited to {limit} vertices, got {n}")]
    SizeLimit { n: usize, limit: usize },

    #[error("invalid arms: {0}")]
    InvalidArms(String),

    #[error("config `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("arm {arm} is suboptimal but has zero gap")]
    ZeroGap { arm: usize },

    #[error("epoch {epoch}: arm {arm} received no samples")]
    EmptyEpoch { epoch: u32, arm: usize },

    #[error("output: {0}")]
    Output(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
