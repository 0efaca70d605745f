//! Batch front end for `grassdet-core`: JSON inputs, seeded verification suites and
//! machine-readable reports.

pub mod checks;
pub mod commands;
mod failure;
pub mod instances;
pub mod io;
pub mod report;
pub mod suites;

pub use failure::Failure;
pub use report::{Case, CheckResult, Report, RunConfig};
