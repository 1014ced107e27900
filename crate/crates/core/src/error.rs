//! Crate-wide error type and exit-code mapping for the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's preconditions (shape mismatch,
    /// out-of-range label, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Data that must have full column rank does not. The message says which
    /// matrix is deficient and how to proceed.
    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    /// A numerical routine failed (SVD non-convergence, unexpected loss of
    /// positive definiteness, non-finite output).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A file did not conform to its binary format.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// An experiment stage failed; wraps the underlying error.
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 2 for configuration/usage problems,
    /// 3 for numerical or rank failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficient(_) | Error::Numerical(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
