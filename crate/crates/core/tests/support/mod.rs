//! Checks shared by the per-area test targets and the acceptance run.
#![allow(dead_code)]

pub mod gradients;
pub mod invariants;
pub mod oracles;
