// SPDX-License-Identifier: Apache-2.0

//! Event tables in CSV form: one row per event with case, activity and
//! timestamp columns.

use std::collections::HashMap;
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use travas_core::{Activity, SimpleEventLog, TraceVariant};

use crate::LogError;

/// Column names of the case identifier, activity and timestamp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvColumns {
    pub case: String,
    pub activity: String,
    pub timestamp: String,
}

impl Default for CsvColumns {
    fn default() -> Self {
        CsvColumns {
            case: "case:concept:name".into(),
            activity: "concept:name".into(),
            timestamp: "time:timestamp".into(),
        }
    }
}

const OFFSET_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S%.f%:z",
    "%Y-%m-%d %H:%M:%S%.f%z",
    "%Y-%m-%dT%H:%M:%S%.f%z",
];
const NAIVE_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

/// Parses an ISO-8601 timestamp into UTC. Timestamps without an offset are
/// taken as UTC; a bare date means midnight.
pub fn parse_timestamp(value: &str) -> Option<NaiveDateTime> {
    let value = value.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(value) {
        return Some(t.naive_utc());
    }
    for format in OFFSET_FORMATS {
        if let Ok(t) = DateTime::parse_from_str(value, format) {
            return Some(t.naive_utc());
        }
    }
    for format in NAIVE_FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(value, format) {
            return Some(t);
        }
    }
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Reads an event table and reduces it to its variant multiset.
///
/// Events are grouped by case and ordered by timestamp; events with equal
/// timestamps keep their input order. Row numbers in errors count data rows
/// from 1 (the header is not counted).
pub fn parse_event_csv<R: Read>(
    source: R,
    columns: &CsvColumns,
) -> Result<SimpleEventLog, LogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(LogError::EmptyLog);
    }
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LogError::MissingColumn(name.to_owned()))
    };
    let (case_col, activity_col, time_col) = (
        position(&columns.case)?,
        position(&columns.activity)?,
        position(&columns.timestamp)?,
    );

    let mut case_index: HashMap<String, usize> = HashMap::new();
    let mut cases: Vec<Vec<(NaiveDateTime, Activity)>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let raw_time = field(time_col);
        let time = parse_timestamp(raw_time).ok_or_else(|| LogError::Timestamp {
            row,
            value: raw_time.to_owned(),
        })?;
        let activity =
            Activity::new(field(activity_col)).map_err(|source| LogError::Row { row, source })?;
        let next = cases.len();
        let slot = *case_index.entry(field(case_col).to_owned()).or_insert(next);
        if slot == next {
            cases.push(Vec::new());
        }
        cases[slot].push((time, activity));
    }
    if cases.is_empty() {
        return Err(LogError::EmptyLog);
    }

    let mut log = SimpleEventLog::new();
    for mut events in cases {
        events.sort_by_key(|(time, _)| *time);
        let variant = TraceVariant::new(events.into_iter().map(|(_, a)| a).collect())
            .expect("every case has at least one event");
        log.add(variant, 1).expect("positive frequency");
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variant(labels: &[&str]) -> TraceVariant {
        TraceVariant::from_labels(labels.iter().copied()).unwrap()
    }

    fn parse(text: &str) -> Result<SimpleEventLog, LogError> {
        parse_event_csv(text.as_bytes(), &CsvColumns::default())
    }

    const HEADER: &str = "case:concept:name,concept:name,time:timestamp\n";

    #[test]
    fn identical_cases_collapse() {
        let log = parse(&format!(
            "{HEADER}c1,register,2023-01-01T08:00:00\n\
             c1,visit,2023-01-01T09:00:00\n\
             c2,register,2023-01-01T08:00:00\n\
             c2,visit,2023-01-01T09:00:00\n"
        ))
        .unwrap();
        assert_eq!(log.num_variants(), 1);
        assert_eq!(log.frequency(&variant(&["register", "visit"])), 2);
    }

    #[test]
    fn orders_by_timestamp_then_row() {
        let log = parse(&format!(
            "{HEADER}c1,b,2023-01-01 10:00:00\n\
             c1,a,2023-01-01 09:00:00\n\
             c1,c,2023-01-01 10:00:00\n"
        ))
        .unwrap();
        assert_eq!(log.frequency(&variant(&["a", "b", "c"])), 1);
    }

    #[test]
    fn mixed_timestamp_forms() {
        for t in [
            "2023-01-01T08:00:00Z",
            "2023-01-01T08:00:00.123+02:00",
            "2023-01-01 08:00:00+00:00",
            "2023-01-01 08:00:00.5",
            "2023-01-01",
        ] {
            assert!(parse_timestamp(t).is_some(), "{t}");
        }
        // offsets are honoured: 09:00+02:00 is before 08:00Z
        let log = parse(&format!(
            "{HEADER}c1,late,2023-01-01T08:00:00Z\nc1,early,2023-01-01T09:00:00+02:00\n"
        ))
        .unwrap();
        assert!(log.contains(&variant(&["early", "late"])));
    }

    #[test]
    fn bad_timestamp_reports_row() {
        let err = parse(&format!(
            "{HEADER}c1,a,2023-01-01T08:00:00\nc1,b,not-a-date\n"
        ))
        .unwrap_err();
        match err {
            LogError::Timestamp { row, value } => {
                assert_eq!(row, 2);
                assert_eq!(value, "not-a-date");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_column() {
        let err = parse("case,activity,time\nc1,a,2023-01-01\n").unwrap_err();
        assert!(matches!(err, LogError::MissingColumn(c) if c == "case:concept:name"));
    }

    #[test]
    fn custom_columns() {
        let columns = CsvColumns {
            case: "case".into(),
            activity: "activity".into(),
            timestamp: "time".into(),
        };
        let log =
            parse_event_csv("time,activity,case\n2023-01-01,a,1\n".as_bytes(), &columns).unwrap();
        assert_eq!(log.total_cases(), 1);
    }

    #[test]
    fn empty_sources() {
        assert!(matches!(parse(""), Err(LogError::EmptyLog)));
        assert!(matches!(parse(HEADER), Err(LogError::EmptyLog)));
    }

    #[test]
    fn empty_activity_is_row_error() {
        let err = parse(&format!("{HEADER}c1,,2023-01-01\n")).unwrap_err();
        assert!(matches!(err, LogError::Row { row: 1, .. }));
    }

    #[test]
    fn sample_log_from_events() {
        let mut text = HEADER.to_owned();
        let variants: [(&[&str], usize); 4] = [
            (&["register", "visit", "blood-test", "release"], 10),
            (&["register", "blood-test", "visit", "release"], 8),
            (&["register", "visit", "release"], 20),
            (
                &["register", "visit", "blood-test", "blood-test", "release"],
                5,
            ),
        ];
        let mut case = 0;
        for (acts, n) in variants {
            for _ in 0..n {
                case += 1;
                for (i, a) in acts.iter().enumerate() {
                    text.push_str(&format!("p{case},{a},2023-02-01T{:02}:00:00\n", 8 + i));
                }
            }
        }
        let log = parse(&text).unwrap();
        assert_eq!(log.num_variants(), 4);
        let mut freqs: Vec<u64> = log.iter().map(|(_, f)| f).collect();
        freqs.sort_unstable();
        assert_eq!(freqs, [5, 8, 10, 20]);
    }
}
