//! File formats, reports and the command line for centroid networks.
//!
//! The numerics live in [`sinkclust_core`]; this crate adds `.emb` / CSV
//! datasets with attribute sidecars, model checkpoints, JSON report
//! envelopes, parallel episode evaluation and the `sinkclust` binary.

pub mod checkpoint;
pub mod cli;
mod error;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
