//! Scenario runner for the probe-qubit simulations in `spinboson-core`.
//!
//! A scenario file names one experiment family (power-spectrum sweep,
//! entanglement sweep, bound comparison, Bell-state decay, entangling
//! gate), the model parameters and the `μ/ν` sweep. [`runner::run`]
//! propagates every point, writes CSV or JSONL tables with a commented
//! header, a summary table, and finally `manifest.toml`.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod output;
pub mod record;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
pub use output::Format;
pub use runner::{run, RunOptions, RunOutcome};
pub use scenario::{Plan, Scenario};
