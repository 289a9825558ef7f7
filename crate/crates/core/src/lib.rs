#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lattice;
pub mod laws;
pub mod deviation;
pub mod forcing;
pub mod replicate;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
