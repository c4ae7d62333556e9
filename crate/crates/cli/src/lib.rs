//! Experiment runner around the `degregorio` library: verb dispatch, run
//! persistence (`run.json` with a hashed file manifest), plot-data emission
//! and run comparison.
//!
//! Exit-code contract: `0` all verdicts pass, `2` a scientific verdict
//! failed (including blow-up guard trips), `64` usage error. Numeric CSV
//! output uses shortest round-trip formatting, so identical configurations
//! reproduce byte-identical files.

pub mod commands;
pub mod compare;
pub mod crosscheck;
pub mod plots;
pub mod run;

pub use run::{CheckVerdict, RunConfig, RunRecord, RunWriter};

/// Invocation problem (as opposed to a failed scientific verdict).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}
