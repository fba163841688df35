//! File formats: snapshot, trace and config documents, JSON reports, and
//! Graphviz export. All JSON is emitted with a fixed key order and
//! lowercase hex digests.

mod dot;
mod files;
pub mod report;

use std::fmt;

use crate::chain::Violation;

pub use dot::export_dot;
pub use files::{
    load_config, load_snapshot, load_trace, save_config, save_snapshot, save_trace, LoadOptions,
};

/// Version stamped into every document this crate writes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u32),
    #[error("{}", ViolationList(.0))]
    InvalidSnapshot(Vec<Violation>),
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "snapshot failed verification with {} violation(s)",
            self.0.len()
        )?;
        for v in self.0 {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}
