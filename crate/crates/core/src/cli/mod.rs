//! Configuration, orchestration and file output for the command-line tool.

pub mod config;
pub mod output;
pub mod pipeline;

pub use config::{load_config, parse_config, ProbeSpec, RunConfig};
pub use output::format_float;
pub use pipeline::{convergence_sweep, run_scenario, RunOutcome, RunReport, SweepReport};
