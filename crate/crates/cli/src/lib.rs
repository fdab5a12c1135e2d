//! Randomized verification harness for the `meanforge-core` inequalities.
//!
//! A [`TrialConfig`] fixes a master seed; each trial derives its own seed from
//! it, generates an instance, evaluates every inequality of the selected
//! levels, and records one verdict per inequality. Reports depend only on the
//! configuration, never on thread scheduling.

pub mod config;
pub mod generate;
pub mod report;
pub mod suite;

pub use config::{Field, Level, TrialConfig};
pub use report::{emit_report, Format, TrialReport};
pub use suite::{run_suite, run_suite_with_instance};
