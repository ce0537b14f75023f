//! Experiment harness: scenario files, comparison tables, and figures.

pub mod cli;
pub mod experiments;
pub mod io;
pub mod plot;
pub mod scenario;
