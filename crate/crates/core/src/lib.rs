// Negated float comparisons such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod checkpoint;
pub mod config;
pub mod dsp;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod io;
pub mod manifest;
pub mod masking;
pub mod objective;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
