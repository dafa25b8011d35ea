//! Configuration, dispatch, report emission and the acceptance suite behind
//! the `qeilab` binary.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::RunConfig;
pub use error::CliError;
pub use report::ReportEnvelope;
