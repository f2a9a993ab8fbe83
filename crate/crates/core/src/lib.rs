//! Core algorithms for training a single aircraft-generic fuel-flow regressor
//! and measuring how it generalizes to aircraft types it never saw.
//!
//! Everything here is pure computation over in-memory data and builds without
//! `std` (only `alloc` is required). File formats, the command line and report
//! emission live in the `ffdg` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod eval;
pub mod fleet;
pub mod linalg;
mod math;
pub mod nn;
pub mod quantile;
pub mod rng;
pub mod sampling;
pub mod synth;
pub mod train;

pub use error::{Error, Result};

/// Version string recorded in checkpoints and dataset metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
