//! Library surface of the harness: configuration, run orchestration,
//! sweeps, and record types. The `couette` binary is a thin wrapper.

pub mod config;
pub mod io;
pub mod record;
pub mod runner;
pub mod schema;
pub mod sweeps;

pub use config::{RunConfig, RunMode};
pub use record::RunRecord;
pub use runner::{execute, Outcome, EXIT_BUDGET, EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK};
