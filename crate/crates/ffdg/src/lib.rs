//! File formats, reports and the `ffdg` command line on top of `ffdg-core`.

pub mod checkpoint;
pub mod cli;
pub mod config;
mod csvio;
pub mod dataset_csv;
pub mod error;
pub mod fleet_csv;
pub mod keyvalue;
pub mod manifest;
pub mod parallel;
pub mod report;
pub mod trajectory_csv;

pub use error::{Error, Result};
