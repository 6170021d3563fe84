// `!(x > 0.0)` is used on purpose so NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod cli;
pub mod config;
pub mod diesel;
pub mod error;
pub mod lti;
pub mod sim;
pub mod solar;
pub mod tuner;
pub mod wind;

pub use error::{LfcError, Result};
