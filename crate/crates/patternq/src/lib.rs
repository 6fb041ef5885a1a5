//! Command-line front end for `patternq-core`.
//!
//! Reads and writes the JSON graph, partition, permutation and model
//! formats, runs the analysis pipeline into a hash-chained bundle, and
//! renders steady states on lattices.

pub mod bundle;
pub mod commands;
pub mod error;
pub mod json;
pub mod load;
pub mod render;
pub mod report;

pub use bundle::{AnalysisBundle, PartitionChoice};
pub use error::{CliError, Stage};
