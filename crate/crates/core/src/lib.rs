//! Epsilon-samples and (eps, tau)-nets for smoothed geometric range spaces.
//!
//! Samples come from discrepancy halving over minimum-cost matchings, merged
//! and reduced to a target size; nets are verified against explicit or swept
//! families of smoothed halfspaces and kernel ranges.

// `!(x > 0.0)` is used on purpose so that NaN fails parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod discrepancy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod matching;
pub mod nets;
pub mod rng;

pub use error::{Error, Result};
