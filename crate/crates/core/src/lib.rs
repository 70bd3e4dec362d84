//! Deterministic identification over multiple-access channels.
//!
//! The crate computes inner and outer bounds on the deterministic
//! identification (DI) capacity region of a K-input discrete memoryless MAC,
//! and builds and simulates finite-blocklength DI codes on type classes.

pub mod channel;
pub mod cli;
pub mod codec;
pub mod error;
pub mod oracle;
pub mod prob;
pub mod regions;
pub mod rng;
pub mod types;

pub use error::{Error, Result};
