use thiserror::Error;

use crate::svd::PartialSvd;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {requested} entries requested, cap is {cap}")]
    ResourceLimit { requested: usize, cap: usize },

    /// Truncated SVD ran out of Lanczos steps. Carries whatever did converge.
    #[error("truncated SVD did not converge: {} of {} triples after {} steps", .0.converged.len(), .0.requested, .0.steps)]
    NotConverged(Box<PartialSvd>),

    #[error("rank deficient{}: {needed} leading directions needed, only {available} available", window_suffix(.window))]
    RankDeficient {
        needed: usize,
        available: usize,
        /// 1-based base-window start, when raised from an H-matrix row.
        window: Option<usize>,
    },

    #[error("heterogeneity index undefined: {0}")]
    UndefinedIndex(String),
}

fn window_suffix(window: &Option<usize>) -> String {
    match window {
        Some(i) => format!(" at base window {i}"),
        None => String::new(),
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
