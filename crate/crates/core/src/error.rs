//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, simulation, and reduction routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix literal had rows of unequal length or was not square.
    #[error("matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },

    /// A nonnegative matrix contained a negative entry.
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    /// A row sum was outside the tolerance for its matrix class.
    #[error("row {row} sums to {sum}, expected {expected} within {tol}")]
    RowSum {
        row: usize,
        sum: f64,
        expected: f64,
        tol: f64,
    },

    /// Operands had incompatible dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A parameter violated its documented range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParam { name: &'static str, message: String },

    /// A coefficient row of a delayed step violated its invariant.
    #[error("step {step}: coefficient row {row} {message}")]
    CoefficientRow {
        step: usize,
        row: usize,
        message: String,
    },

    /// A switching provider produced a Laplacian outside its declared bounds.
    #[error("provider emitted l_max = {l_max} outside [{l_min}, {l_max_bound}] at event {event}")]
    ProviderBounds {
        event: usize,
        l_max: f64,
        l_min: f64,
        l_max_bound: f64,
    },

    /// A sampled row was not a member of its admissible row set.
    #[error("agent {agent} row {index} violates its admissible set: {message}")]
    RowOutsideFamily {
        agent: usize,
        index: usize,
        message: String,
    },

    /// Reconstructed state disagreed with the simulated trajectory.
    #[error("replay mismatch at step {step}, agent {agent}: |{reconstructed} - {simulated}| = {error} > {tol}")]
    ReplayMismatch {
        step: usize,
        agent: usize,
        reconstructed: f64,
        simulated: f64,
        error: f64,
        tol: f64,
    },

    /// A trajectory query fell outside the simulated time span.
    #[error("time {t} outside trajectory span [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// A scenario configuration failed validation.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// Filesystem failure while writing or reading artifacts.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// JSON parse or serialization failure.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
