//! Kirkwood-Dirac quasiprobabilities and the coherence measures built on them.

pub mod coherence;
pub mod error;
pub mod json;
pub mod kd;
pub mod linalg;
pub mod measurement;
pub mod optimizer;
pub mod response;
pub mod rng;

pub use error::{Error, Result};
