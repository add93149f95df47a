//! Steady-state performance of door-to-door transit fleets.
//!
//! Fleets are modelled as counts of vehicles at each workload level `(i, j)`:
//! `i` passengers onboard and `j` callers assigned for pickup. Vehicles move
//! between levels through assignment, pickup and delivery links, and a steady
//! state balances the flow on those links at every level. The crate solves that
//! balance for non-shared taxi, dial-a-ride and two shared-taxi dispatch rules,
//! traces the user-time versus fleet-size curves, compares them against
//! conventional transit and the private auto, and checks the predictions with
//! an agent-based simulator.
//!
//! Everything works in intrinsic units: the service region has unit area and
//! vehicles travel at unit speed, so demand is the single number
//! `pi = lambda * R^{3/2} / v`.

pub mod baseline;
pub mod cli;
pub mod error;
pub mod network;
pub mod optimize;
pub mod output;
pub mod pareto;
pub mod policy;
pub mod sim;
pub mod steady;
pub mod svg;
pub mod units;

pub use error::{ModelError, Result};
pub use network::{LinkKind, StateVector, TransitionNetwork, WorkloadNode};
pub use policy::Policy;
pub use units::{Scenario, DEFAULT_K};
