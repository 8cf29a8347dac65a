//! Files, parallel execution and the command line for `ecgid-core`.
//!
//! - [`record`]: WFDB records and CSV signals on disk, plus [`record::FileChannel`]
//!   for reading pieces of recordings too long to load whole.
//! - [`database`]: `RECORDS` indexes, manifests and per-protocol beat extraction.
//! - [`dataset`], [`report`], [`model`]: the CSV and JSON files the tool
//!   writes, each with a matching reader.
//! - [`exec::Pool`]: a rayon-backed executor whose output is independent of
//!   the thread count.
//! - [`cli::run`]: the `ecgid` command.

pub mod cli;
pub mod database;
pub mod dataset;
mod error;
pub mod exec;
pub mod model;
pub mod record;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
