//! Experiment driver for `shearmix-core`: run configuration, deterministic CSV/JSON
//! output, the acceptance suite and the `shearmix` command line.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod identities;
pub mod io;

pub use error::{LabError, Result};
