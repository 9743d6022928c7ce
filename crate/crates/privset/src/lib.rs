//! File formats, CSV ingestion, reports, the HTTP service and the command
//! line front end for `privset-core`.

pub mod cli;
pub mod feedback;
pub mod files;
pub mod ingest;
pub mod report;
pub mod service;
pub mod snapshot;

pub use files::Error;
