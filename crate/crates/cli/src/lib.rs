//! Experiment harness over the point-process metric library: convergence
//! studies, concentration checks, Campbell-functional estimates, bound
//! tables, and their file formats.

// Validation reads as `!(x > 0.0)` throughout so NaN is rejected along
// with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fit;
pub mod plot;
pub mod rows;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] ppwass::Error),

    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    /// A row failed mid-run; successful rows were flushed to a partial file.
    #[error("run aborted at n = {n}, replication {replication}: {source} (partial results in {partial_path})")]
    Aborted {
        n: usize,
        replication: usize,
        partial_path: String,
        #[source]
        source: ppwass::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;
