//! Numerical laboratory for spherically reduced wave fields: exact
//! solutions, a leapfrog solver, radiation-field extraction at the
//! boundary and energy/equipartition diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod geometry;
pub mod numerics;
pub mod oracle;
pub mod profile;
pub mod radiation;

pub use error::{Error, Result};
pub use evolve::{RadialGrid, RunPlan, Snapshot, Solver, Trace, WaveState};
pub use geometry::{make_scenario, End, Scenario, ScenarioKind};
pub use profile::{InitialData, ProfileSpec, RadialProfile};
