//! Acceptance run for the workspace.
//!
//! The criteria live in [`hydrocs::verify`]; this package only hosts the
//! `acceptance` test target, kept apart so that `cargo test --workspace`
//! reaches it after every unit and integration test.

pub use hydrocs::verify::{criterion, outcome_line, Outcome, Thresholds, CRITERION_TITLES};
