use thiserror::Error;

use crate::model::Composition;

/// Errors raised across the model, solvers and data layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A solver precondition is not met.
    #[error("argument error: {0}")]
    Argument(String),

    /// Composition on the boundary where an interior quantity was requested.
    #[error("boundary composition ({r_w}, {r_m}): {reason}")]
    Boundary { r_w: f64, r_m: f64, reason: String },

    #[error("no convergence after {iterations} iterations (last iterate ({}, {}))", last.r_w, last.r_m)]
    Convergence { iterations: usize, last: Composition },

    /// Analytic and numeric corner tests disagree.
    #[error("corner test inconsistency: {0}")]
    InconsistentCorner(String),

    #[error("integration produced a non-finite state at t = {time} (last finite state ({}, {}))", last.r_w, last.r_m)]
    Integration { time: f64, last: Composition },

    /// Observed data inconsistent with the model (e.g. not near any equilibrium).
    #[error("model/data inconsistency: {0}")]
    Inconsistent(String),

    #[error("malformed data at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
