//! Netlist and excitation documents, CSV traces and JSON reports.

mod excitation;
mod netlist;
mod report;
mod trace_csv;

use std::path::Path;

use thiserror::Error;

use crate::network::{ElementError, ValidationReport};

pub use excitation::{ExcitationDocument, GridEntry};
pub use netlist::{
    parse_netlist, serialize_netlist, EdgeEntry, ElementEntry, NetlistDocument, VertexEntry,
};
pub use report::{to_pretty_json, ReduceReport, ValidationSummary};
pub use trace_csv::{read_trace_csv, trace_to_csv, write_trace_csv};

/// Document schema version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("edge {edge}: {source}")]
    Element { edge: usize, source: ElementError },
    #[error("csv: {0}")]
    Csv(String),
}

impl IoError {
    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }

    pub(crate) fn file(path: &Path, e: std::io::Error) -> Self {
        IoError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

/// Reads a whole file as UTF-8.
pub fn read_file(path: impl AsRef<Path>) -> Result<String, IoError> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))
}

/// Writes `contents` to `path`.
pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, contents).map_err(|e| IoError::file(path, e))
}

fn check_format(format: u32) -> Result<(), IoError> {
    if format == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::Schema(format!(
            "unsupported format {format}, expected {FORMAT_VERSION}"
        )))
    }
}
