//! Robust quantum metrology with classical-code probe states.
//!
//! Probe states are uniform superpositions over GF(2) linear codes; their
//! phase-sensing performance under rate-rescaled Lindblad noise is governed
//! by the weight enumerator of the dual code. This crate enumerates the
//! codes, integrates the master equation, and checks the two against each
//! other.

pub mod channel;
pub mod metrology;
pub mod oracle;
pub mod error;
pub mod gf2;
pub mod linalg;
pub mod qop;

pub use error::{Error, Result};
