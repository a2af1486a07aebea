//! IO, reporting and command layer over `choicefit-core`: CSV ingestion with
//! schema validation, JSON outputs, published-style tables, likelihood-ratio
//! replay from fixtures files and the `choicefit` command-line interface.

pub mod config;
pub mod csv;
pub mod error;
pub mod fixtures;
pub mod jsonout;
pub mod logging;
pub mod report;
pub mod runner;
pub mod schema;

pub use error::{CliError, Result};
