use std::path::PathBuf;

use thiserror::Error;

use crate::optimizer::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The quasi-subgradient vanished: the iterate is a minimizer.
    #[error("at optimum: no descent direction exists")]
    AtOptimum,

    /// A hypothesis of a bound does not hold for the supplied inputs.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("reference optimizer diverged after {steps} steps (last loss {last_loss})")]
    Divergence { steps: usize, last_loss: f64 },

    /// A run hit a non-finite loss. The partial trajectory up to `k` is kept.
    #[error("non-finite loss at iteration {k}")]
    NonFinite { k: usize, partial: Box<Trajectory> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
