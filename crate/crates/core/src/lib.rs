//! Seedable discrete-time inventory replenishment simulation.
//!
//! Five environments (newsvendor, multi-period replenishment, beer game,
//! two-level warehouse network, dual sourcing) share one period loop
//! ([`kernel::run_episode`]). Optimal-policy oracles and behavioral metrics
//! score the resulting [`kernel::EpisodeLog`]s, and external agents plug in
//! over a line-delimited JSON protocol.

pub mod agents;
pub mod env;
pub mod harness;
pub mod kernel;
pub mod memory;
pub mod metrics;
pub mod model;
pub mod money;
pub mod oracles;
pub mod process;
pub mod rng;

pub use agents::{Agent, AgentError, AgentSpec};
pub use env::{EnvParams, Environment};
pub use kernel::{run_episode, EpisodeLog, SimConfig};
pub use model::{Action, EnvId, Framing, Observation};
pub use money::Money;
