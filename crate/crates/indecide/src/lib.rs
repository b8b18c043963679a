//! File formats, charts, the simulation harness and the command line for
//! selective classification with indecisions.
//!
//! The algorithms live in [`indecide_core`]; this crate adds everything that
//! needs `std`: CSV and key-value documents, SVG output, run manifests, the
//! seeded Monte Carlo experiments and the `indecide` binary.

pub mod chart;
pub mod cli;
pub mod data;
pub mod docs;
pub mod experiments;
pub mod format;
pub mod manifest;

use thiserror::Error;

/// Input or file-format problems surfaced to the user.
#[derive(Debug, Error)]
pub enum FormatError {
    /// The content does not match the documented schema. Line 0 means the
    /// problem is not tied to a single line.
    #[error("schema error at line {line}: {message}")]
    Schema {
        /// 1-based line number.
        line: u64,
        /// What went wrong.
        message: String,
    },
    /// Reading or writing failed.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// The CSV layer failed.
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// The input was read but rejected by the algorithms.
    #[error(transparent)]
    Core(#[from] indecide_core::Error),
}

impl FormatError {
    /// Schema error at a line.
    pub fn schema(line: impl TryInto<u64>, message: impl Into<String>) -> Self {
        Self::Schema {
            line: line.try_into().unwrap_or(0),
            message: message.into(),
        }
    }
}
