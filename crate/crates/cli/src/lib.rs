//! Command-line front end for the safe-pass feasibility models.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod files;

pub use error::{exit, CliError};
