//! Device-independent randomness expansion with spot-checking CHSH tests:
//! finite-round entropy certificates, protocol planning, a seeded protocol
//! simulator and a Toeplitz-hashing extractor.

pub mod entropy;
pub mod error;
pub mod error_budget;
pub mod extractor;
pub mod optimizer;
pub mod protocol_sim;

pub use error::{Error, Result};
