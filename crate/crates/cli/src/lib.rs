//! Batch front end: JSON scenario configs in, CSV profiles and a versioned
//! JSON report out.
//!
//! Exit codes: 0 success, 1 malformed config, 2 failed hypothesis
//! validation, 3 solver did not converge (the report is still written),
//! 4 certificate violation when consistency was expected.

pub mod error;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use run::{execute, execute_file, Outcome, Report, Status, SCHEMA_VERSION};
pub use scenario::{GridSpec, HypothesisSpec, InitSpec, Scenario, SweepSpec, Task, TaskOptions};
