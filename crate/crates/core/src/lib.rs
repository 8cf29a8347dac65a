//! ECG subject identification from R-aligned beat morphology.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers
//! the whole pipeline from packed WFDB sample bytes to experiment reports:
//!
//! - [`wfdb`]: header grammar, format 16/212 sample codecs, calibration.
//! - [`filter`] and [`detect`]: zero-phase band-pass, Pan-Tompkins style
//!   R-peak detection and fixed-width beat windows.
//! - [`fiducials`]: P/Q/R/S/T landmarks and the nine per-beat features.
//! - [`features`]: 20-beat fragment vectors, labelled datasets, z-scoring.
//! - [`classifiers`]: eleven classical classifiers behind one contract.
//! - [`stats`]: Spearman and Kendall tau-b with permutation p-values.
//! - [`synth`]: a seeded Gaussian-bump ECG generator with ground truth.
//! - [`experiments`]: lead sweep, Holter drift and drug-effect protocols.
//!
//! File access, the CLI and the parallel executor live in the `ecgid` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classifiers;
pub mod detect;
mod error;
pub mod experiments;
pub mod features;
pub mod fiducials;
pub mod filter;
mod linalg;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod wfdb;

pub use error::{Error, Result};
