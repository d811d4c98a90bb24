use thiserror::Error;

use crate::io::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An item that takes part in a preference has a score of exactly zero.
    #[error("item {item} has zero score but appears in a preference")]
    ZeroScore { item: usize },

    #[error("preference {preference}: suffix sum at position {position} is not positive")]
    ZeroSuffix { preference: usize, position: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid gamma parameters (shape={shape}, rate={rate}) at sweep {sweep}")]
    InvalidGamma { sweep: usize, shape: f64, rate: f64 },

    #[error("posterior sample {sample} has a non-finite log-likelihood")]
    NonFiniteLogLikelihood { sample: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("alpha={alpha}: {source}")]
    AtAlpha {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_alpha(self, alpha: f64) -> Self {
        Error::AtAlpha {
            alpha,
            source: Box::new(self),
        }
    }

    /// Strips iteration/alpha context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } | Error::AtAlpha { source, .. } => source.root(),
            other => other,
        }
    }
}
