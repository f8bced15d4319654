// SPDX-License-Identifier: Apache-2.0

use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}: cannot parse timestamp {value:?}")]
    Timestamp { row: usize, value: String },
    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: travas_core::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: frequency must be positive")]
    NonPositiveFrequency { line: usize },
    #[error("activity {0:?} contains a reserved separator (',' or ';')")]
    UnrepresentableLabel(String),
    #[error("XES: {0}")]
    Xes(String),
    #[error("cannot write logs in {0} format")]
    UnsupportedOutput(&'static str),
    #[error("empty log")]
    EmptyLog,
}
