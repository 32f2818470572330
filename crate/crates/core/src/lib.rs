//! Centroid networks on a `no_std` + `alloc` core.
//!
//! The crate covers the whole numerical pipeline:
//!
//! - [`ot`]: entropic optimal transport between weighted point sets
//!   (plain and log-domain Sinkhorn iterations).
//! - [`clustering`]: Sinkhorn K-Means and the Lloyd / K-Means++ baseline.
//! - [`assign`]: softmax and Sinkhorn conditionals, prototypes, hard assignment.
//! - [`episodes`]: few-shot episodes, samplers and the attribute-grid generator.
//! - [`metrics`]: cluster/class matching, the three few-shot accuracies,
//!   aggregation with confidence intervals and the class semantics
//!   consistency ratio.
//! - [`trainer`]: a small MLP embedding trained by the prototype surrogate
//!   loss plus center loss, with hand-written gradients.
//!
//! IO, file formats and the command line live in the companion `sinkclust` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assign;
pub mod clustering;
pub mod episodes;
mod error;
mod math;
pub mod matrix;
pub mod metrics;
pub mod ot;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
pub use matrix::Matrix;
