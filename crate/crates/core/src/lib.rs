//! Stability analysis of polling systems in random regimes.

// `!(x > 0.0)` is how NaN gets rejected alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod fluid;
pub mod lyapunov;
pub mod model;
pub mod plan;
pub mod presets;
pub mod seed;
pub mod sim;
pub mod stream;

pub use error::{Error, Result};
