//! Quantum linear regression by cosine-weighted column interference,
//! simulated on dense state vectors.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod encoding;
pub mod error;
pub mod measurement;
pub mod optim;
pub mod regression;
pub mod resources;
pub mod rng;
pub mod statevector;
pub mod trainer;

pub use error::{Error, Result};
