//! Configuration, suites, reports and the command-line front end of the
//! `sobolev-lab` binary.

pub mod cli;
pub mod config;
pub mod report;
pub mod suites;

pub use cli::run_cli;
pub use config::{ExperimentConfig, IndexSpec, Suite};
pub use report::{emit_report, Comparison, ReportFiles, Row, Summary};
pub use suites::{run_suite, SuiteOutput};
