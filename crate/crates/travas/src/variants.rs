// SPDX-License-Identifier: Apache-2.0

//! The variant-list text format: one `act1,act2,...,actn;frequency` line per
//! variant, UTF-8. `,` and `;` cannot appear inside labels.

use std::io::{BufRead, Write};

use travas_core::{Activity, SimpleEventLog, TraceVariant};

use crate::LogError;

/// Parses a variant list. Blank lines are skipped and repeated variants have
/// their frequencies summed.
pub fn parse_variant_list<R: BufRead>(source: R) -> Result<SimpleEventLog, LogError> {
    let mut log = SimpleEventLog::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| LogError::Malformed {
            line: line_no,
            reason,
        };
        let (sequence, frequency) = line
            .rsplit_once(';')
            .ok_or_else(|| malformed("expected 'activities;frequency'".into()))?;
        let frequency: i64 = frequency
            .trim()
            .parse()
            .map_err(|_| malformed(format!("invalid frequency {frequency:?}")))?;
        if frequency <= 0 {
            return Err(LogError::NonPositiveFrequency { line: line_no });
        }
        let activities = sequence
            .split(',')
            .map(Activity::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| malformed(e.to_string()))?;
        let variant = TraceVariant::new(activities).map_err(|e| malformed(e.to_string()))?;
        log.add(variant, frequency as u64)
            .map_err(|e| malformed(e.to_string()))?;
    }
    Ok(log)
}

/// Writes `log` sorted by descending frequency, then by activity sequence.
pub fn write_variant_list<W: Write>(log: &SimpleEventLog, mut sink: W) -> Result<(), LogError> {
    for (variant, frequency) in log.by_descending_frequency() {
        let mut first = true;
        for activity in variant.activities() {
            let label = activity.as_str();
            if label.contains([',', ';']) {
                return Err(LogError::UnrepresentableLabel(label.to_owned()));
            }
            if !first {
                sink.write_all(b",")?;
            }
            sink.write_all(label.as_bytes())?;
            first = false;
        }
        writeln!(sink, ";{frequency}")?;
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const HOSPITAL_LOG: &str = "register,visit,blood-test,release;10\n\
        register,blood-test,visit,release;8\n\
        register,visit,release;20\n\
        register,visit,blood-test,blood-test,release;5\n";

    fn variant(labels: &[&str]) -> TraceVariant {
        TraceVariant::from_labels(labels.iter().copied()).unwrap()
    }

    #[test]
    fn single_line() {
        let log = parse_variant_list("register,visit;20".as_bytes()).unwrap();
        assert_eq!(log.frequency(&variant(&["register", "visit"])), 20);
        assert_eq!(log.num_variants(), 1);
    }

    #[test]
    fn sample_log_totals() {
        let log = parse_variant_list(HOSPITAL_LOG.as_bytes()).unwrap();
        assert_eq!(log.total_cases(), 43);
        assert_eq!(log.num_variants(), 4);
    }

    #[test]
    fn duplicates_are_summed() {
        let log = parse_variant_list("a,b;2\r\n\na,b;3\n".as_bytes()).unwrap();
        assert_eq!(log.frequency(&variant(&["a", "b"])), 5);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_variant_list("a;0".as_bytes()),
            Err(LogError::NonPositiveFrequency { line: 1 })
        ));
        assert!(matches!(
            parse_variant_list("a;1\nb;-3".as_bytes()),
            Err(LogError::NonPositiveFrequency { line: 2 })
        ));
        assert!(matches!(
            parse_variant_list("a;1\nno frequency".as_bytes()),
            Err(LogError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_variant_list("a,,b;1".as_bytes()),
            Err(LogError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_variant_list("a;x".as_bytes()),
            Err(LogError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn writes_sorted() {
        let log = parse_variant_list(HOSPITAL_LOG.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_variant_list(&log, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next(), Some("register,visit,release;20"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn empty_log_writes_nothing() {
        let mut out = Vec::new();
        write_variant_list(&SimpleEventLog::new(), &mut out).unwrap();
        assert!(out.is_empty());
        assert!(parse_variant_list(&out[..]).unwrap().is_empty());
    }

    #[test]
    fn rejects_separator_in_label() {
        let log = SimpleEventLog::from_entries([(variant(&["a,b"]), 1)]).unwrap();
        assert!(matches!(
            write_variant_list(&log, Vec::new()),
            Err(LogError::UnrepresentableLabel(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip(entries in prop::collection::vec(
            (prop::collection::vec("[A-Za-z0-9 _-]{1,8}", 1..6), 1u64..1000), 0..10)) {
            let log = SimpleEventLog::from_entries(entries.into_iter().map(|(labels, f)| {
                (TraceVariant::from_labels(labels).unwrap(), f)
            })).unwrap();
            let mut out = Vec::new();
            write_variant_list(&log, &mut out).unwrap();
            prop_assert_eq!(parse_variant_list(&out[..]).unwrap(), log);
        }
    }
}
