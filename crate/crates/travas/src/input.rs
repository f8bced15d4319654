// SPDX-License-Identifier: Apache-2.0

//! Format detection and file-level load/store.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use travas_core::SimpleEventLog;

use crate::csv_log::{parse_event_csv, CsvColumns};
use crate::variants::{parse_variant_list, write_variant_list};
use crate::xes::{read_xes, write_xes};
use crate::LogError;

/// On-disk log formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum LogFormat {
    /// Event table with case, activity and timestamp columns.
    Csv,
    /// `act1,act2,...;frequency` lines.
    Variants,
    Xes,
}

impl LogFormat {
    /// Guesses the format from the file extension: `.csv`, `.xes`, anything
    /// else is a variant list.
    pub fn from_path(path: &Path) -> LogFormat {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("csv") => LogFormat::Csv,
            Some("xes") => LogFormat::Xes,
            _ => LogFormat::Variants,
        }
    }
}

/// Loads a log, inferring the format when `format` is `None`.
pub fn load_log(path: &Path, format: Option<LogFormat>) -> Result<SimpleEventLog, LogError> {
    let reader = BufReader::new(File::open(path)?);
    match format.unwrap_or_else(|| LogFormat::from_path(path)) {
        LogFormat::Csv => parse_event_csv(reader, &CsvColumns::default()),
        LogFormat::Variants => parse_variant_list(reader),
        LogFormat::Xes => read_xes(reader),
    }
}

/// Stores a log as a variant list or XES. Event tables cannot be written
/// since variant logs carry no timestamps.
pub fn store_log(
    log: &SimpleEventLog,
    path: &Path,
    format: Option<LogFormat>,
) -> Result<(), LogError> {
    let format = format.unwrap_or_else(|| LogFormat::from_path(path));
    if format == LogFormat::Csv {
        return Err(LogError::UnsupportedOutput("csv"));
    }
    let mut writer = BufWriter::new(File::create(path)?);
    match format {
        LogFormat::Xes => write_xes(log, &mut writer)?,
        LogFormat::Variants => write_variant_list(log, &mut writer)?,
        LogFormat::Csv => unreachable!("rejected above"),
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_by_extension() {
        assert_eq!(LogFormat::from_path(Path::new("a/log.CSV")), LogFormat::Csv);
        assert_eq!(LogFormat::from_path(Path::new("log.xes")), LogFormat::Xes);
        assert_eq!(
            LogFormat::from_path(Path::new("log.txt")),
            LogFormat::Variants
        );
        assert_eq!(LogFormat::from_path(Path::new("log")), LogFormat::Variants);
    }
}
