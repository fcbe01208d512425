//! Uplink power-domain NOMA for two-tier heterogeneous networks with
//! imperfect successive interference cancellation.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] places base stations and users, draws channel gains and
//!   performs uplink association.
//! * [`noma`] holds the per-cluster SINR/rate model with residual
//!   interference, composite SINR constraints and the alpha-fair utility.
//! * [`cluster_size`] answers "how many users can share this bandwidth"
//!   through the spectral-radius condition and its closed forms.
//! * [`cluster_formation`] groups users of one base station into clusters
//!   by repeated rectangular assignment ([`assignment`]).
//! * [`power_alloc`] and [`bandwidth_alloc`] are the per-cluster power
//!   problem and the network-wide bandwidth problem.
//! * [`orchestrator`] iterates the two until convergence and implements the
//!   baseline schemes.
//! * [`scenario`] drives Monte Carlo sweeps and CSV output.
//! * [`oracles`] contains deliberately naive reference solvers used by the
//!   test suites.

pub mod assignment;
pub mod bandwidth_alloc;
pub mod cluster_formation;
pub mod cluster_size;
pub mod config;
pub mod error;
pub mod noma;
pub mod oracles;
pub mod orchestrator;
pub mod power_alloc;
pub mod scenario;
pub mod topology;
pub mod units;

pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use orchestrator::{run, AllocationState, RunOptions, SchemeKind};
pub use topology::{generate_topology, Topology};
