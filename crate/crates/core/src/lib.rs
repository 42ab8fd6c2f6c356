//! Hitting times of the (1+1)-EA and of the zero-temperature Metropolis chain
//! on the LeadingOnes landscape.
//!
//! The crate is split into five layers:
//!
//! * [`chain`]: bit strings, the LeadingOnes fitness, one-flip and Bernoulli
//!   mutation, the strict and non-strict selection rules and the run loop.
//! * [`exact`]: exact hitting-time laws (negative binomial mixture for the
//!   one-flip chain, independent-level product for the Bernoulli chain), closed
//!   form moments and a transition-matrix oracle over all `2^n` states.
//! * [`simulate`]: a reproducible parallel Monte Carlo harness.
//! * [`stats`]: moment estimators, KS and chi-square tests.
//! * [`verify`]: the verification suites exposed by the command line tool.

pub mod bitstring;
pub mod chain;
pub mod error;
pub mod exact;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use bitstring::BitString;
pub use chain::{
    ChainConfig, ChainState, HittingTime, Initial, MutationKind, RunRecord, SelectionRule,
};
pub use error::{Error, Result};
