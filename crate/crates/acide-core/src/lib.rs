//! Bandwidth allocation, admission control and distribution scheduling for
//! ACIDE peer-to-peer livestream clusters.
//!
//! A base station splits every media package of `S` bits into one block per
//! cluster peer. Phase 1 pushes block `i` to peer `i`; Phase 2 has the peers
//! exchange their blocks over direct links in `n - 1` steps. This crate solves
//! for the block sizes and per-peer bandwidths that minimise the base station
//! bandwidth while still delivering the package within the delay bound `T`,
//! selects which candidates to admit under a pre-reserved budget, and replays
//! the resulting schedule event by event.
//!
//! The crate is `no_std` and only needs `alloc`. IO, experiment drivers and the
//! command line front end live in the `acide` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod admission;
pub mod baseline;
mod error;
pub mod model;
pub mod schedule;
pub mod sim;
pub mod solver;
pub mod tolerance;

pub use admission::{
    admitted_upper_bound, brute_force_admission, join_cluster, AdmissionBudget, AdmissionOutcome,
    MAX_EXHAUSTIVE_CANDIDATES,
};
pub use baseline::{baseline_bandwidths, Baselines};
pub use error::Error;
pub use model::{
    sort_peers, validate_cluster, PeerProfile, StreamParams, ValidationReport, Violation,
};
pub use schedule::{build_schedule, ScheduledTransfer};
pub use sim::{playback_check, simulate, Endpoint, PlaybackReport, SimulationTrace, TransferEvent};
pub use solver::{
    allocated_bandwidth, alpha_coefficients, min_bandwidth, solve_block_sizes, AllocationPlan,
    AlphaCoefficients,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
