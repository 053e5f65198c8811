//! Batch front end for the `satqkd-core` models: configuration, parameter
//! sweeps, distribution tables and CSV/JSON output.

pub mod cli;
pub mod config;
mod error;
pub mod output;
pub mod sweep;

pub use config::{parse_config, SimulationConfig};
pub use error::{Result, SimError};
pub use output::{emit, emit_records};
pub use sweep::{run_sweep, SweepOutput, SweepRecord};
