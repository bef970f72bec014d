//! Reserved vs. on-demand quantum computer allocation as a two-stage
//! stochastic program.
//!
//! The first stage commits a set of reserved machines before demand,
//! availability and entanglement fidelity are known. Once a scenario is
//! realized the operator allocates qubits on reserved machines, teleports
//! remote qubits to the hub over Bell-pair links, and may deploy on-demand
//! machines at the hub. The crate builds the deterministic-equivalent MILP,
//! solves it with a self-contained simplex/branch-and-bound solver, and
//! ships a brute-force oracle plus the EVF and random baselines.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod error;
pub mod experiments;
pub mod formulation;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
pub use model::{
    cost_of_plan, validate_instance, CostParams, Instance, LinkSpec, MachineSpec, OnDemandSpec,
    Plan, Recourse, ValidationReport, Violation,
};
pub use scenario::{Scenario, ScenarioSet};

/// Absolute tolerance used when comparing money values.
pub const MONEY_TOL: f64 = 1e-6;

/// Slack allowed on the fidelity-weighted demand constraint.
pub const DEMAND_SLACK: f64 = 1e-9;
