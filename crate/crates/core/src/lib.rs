//! Energy simulation of broadcast delivery over a three-tier heterogeneous
//! network: one macrocell, low-power phantom cells inside it, and one-hop
//! device-to-device clusters inside each phantom cell.
//!
//! The crate is organized bottom-up:
//!
//! - [`topology`] lays out base stations and users.
//! - [`channel`] draws link budgets and maps them to Shannon rates.
//! - [`energy`] evaluates total energy for macro-only, phantom-only,
//!   clustered and mixed serving plans.
//! - [`planner`] builds the greedy serving plan and holds an exhaustive
//!   single-cell oracle.
//! - [`harness`] runs seeded Monte Carlo trials and user-count sweeps.
//! - [`io`] reads configuration files and writes CSV, JSON and run manifests.
//!
//! See `examples/` for one runnable program per capability.

pub mod channel;
pub mod cli;
pub mod config;
pub mod energy;
pub mod harness;
pub mod io;
pub mod planner;
pub mod seed;
pub mod topology;

pub use channel::{ChannelParams, ChannelSnapshot, LinkBudget, LinkType, SnapshotBuilder};
pub use config::SimConfig;
pub use energy::{EnergyReport, PhantomMinRule, PowerProfile, Scenario};
pub use harness::{run_trial, sweep_users, SweepReport, TrialReport};
pub use planner::{build_plan, Cluster, PlanOptions, ServingPlan};
pub use topology::{CellId, Point2D, Topology, UserId};
