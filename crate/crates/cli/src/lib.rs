//! Experiment harness around `seek_core`: scenario files, parallel sweeps,
//! CSV and SVG output, and the `seek` command line.

pub mod app;
pub mod error;
pub mod expression;
pub mod output;
pub mod plot;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use scenario::Scenario;
