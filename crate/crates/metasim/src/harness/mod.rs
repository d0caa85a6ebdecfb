//! Run lifecycle: scenario execution, grid search, fixture generation, and
//! report emission. Parallelism lives inside `discovery`; everything here is
//! sequential.

pub mod fixture;
pub mod grid;
pub mod report;
pub mod scenario;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Roster(#[from] crate::roster::RosterError),
    #[error(transparent)]
    Ingest(#[from] crate::ingestion::IngestError),
    #[error(transparent)]
    Discovery(#[from] crate::discovery::DiscoveryError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid scenario: {reason}")]
    InvalidScenario { reason: String },
    #[error("fixture size {size} too small, need at least 12")]
    FixtureTooSmall { size: usize },
    #[error("fixture needs at least 2 types, got {type_count}")]
    TooFewTypes { type_count: usize },
    #[error("weight grid is empty")]
    EmptyGrid,
}

pub(crate) fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let context = context.into();
    move |source| HarnessError::Io { context, source }
}
