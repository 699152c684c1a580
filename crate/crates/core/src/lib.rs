// Validation is written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod harness;
pub mod oracles;
pub mod par;
pub mod potentials;
pub mod samplers;
pub mod space;

pub use error::{Error, Result};
