//! First-passage percolation on the complete graph with exponential edge
//! weights: finite-`n` simulation, exact distributional representations,
//! samplers for the limiting variables, and the statistics to compare them.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod exact_laws;
pub mod limit;
pub mod mean_field;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
