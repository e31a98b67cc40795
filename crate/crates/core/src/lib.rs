//! Set-indexed Lévy processes on box lattices and finite trees.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod export;
pub mod indexing;
pub mod integral;
pub mod levy;
pub mod measure;
pub mod regularity;

pub use error::{Error, Result};
