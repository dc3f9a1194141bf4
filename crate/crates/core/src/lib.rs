//! Adaptive input selection for discrete memoryless channels by natural type
//! selection with one bit of feedback per block.
//!
//! The library has four layers:
//!
//! - [`prob`]: alphabets, distributions, stochastic matrices, joint types and
//!   deterministic random streams.
//! - [`exponents`]: the update exponent with its dual form, the Gallager
//!   function, the random-coding exponent and a brute-force primal solver.
//! - [`nts`]: the deterministic iteration on `(Q, Φ)` with its diagnostics.
//! - [`sim`]: block-level simulation of the feedback protocol.
//!
//! [`baselines`] provides reference channels and capacity; [`cli`] backs the
//! `channel-nts` binary.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod exponents;
pub mod nts;
pub mod prob;
mod search;
pub mod sim;

pub use error::{Error, Result};
