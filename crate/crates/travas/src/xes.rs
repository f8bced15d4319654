// SPDX-License-Identifier: Apache-2.0

//! Minimal XES support: enough to exchange variant logs with process mining
//! tools.
//!
//! The writer expands every variant into `frequency` traces with synthetic,
//! strictly increasing timestamps. The reader keeps only the `concept:name`
//! string attribute of each event, in document order.

use std::io::{BufRead, Write};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use travas_core::{Activity, SimpleEventLog, TraceVariant};

use crate::LogError;

fn base_time() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

/// Writes `log` as an XES document. Traces follow descending variant
/// frequency and are named `case-1`, `case-2`, ...
pub fn write_xes<W: Write>(log: &SimpleEventLog, mut sink: W) -> Result<(), LogError> {
    sink.write_all(
        br#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0" xes.features="nested-attributes" xmlns="http://www.xes-standard.org/">
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <extension name="Time" prefix="time" uri="http://www.xes-standard.org/time.xesext"/>
  <global scope="trace">
    <string key="concept:name" value="UNKNOWN"/>
  </global>
  <global scope="event">
    <string key="concept:name" value="UNKNOWN"/>
    <date key="time:timestamp" value="1970-01-01T00:00:00.000+00:00"/>
  </global>
"#,
    )?;
    let base = base_time();
    let mut case = 0u64;
    let mut tick = 0i64;
    for (variant, frequency) in log.by_descending_frequency() {
        for _ in 0..frequency {
            case += 1;
            writeln!(sink, "  <trace>")?;
            writeln!(
                sink,
                "    <string key=\"concept:name\" value=\"case-{case}\"/>"
            )?;
            for activity in variant.activities() {
                let time = base + Duration::seconds(tick);
                tick += 1;
                writeln!(sink, "    <event>")?;
                writeln!(
                    sink,
                    "      <string key=\"concept:name\" value=\"{}\"/>",
                    escape(activity.as_str())
                )?;
                writeln!(
                    sink,
                    "      <date key=\"time:timestamp\" value=\"{}\"/>",
                    time.format("%Y-%m-%dT%H:%M:%S%.3f+00:00")
                )?;
                writeln!(sink, "    </event>")?;
            }
            writeln!(sink, "  </trace>")?;
        }
    }
    sink.write_all(b"</log>\n")?;
    Ok(())
}

/// Structural position of the reader.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Trace,
    Event,
    Other,
}

fn concept_name(element: &BytesStart<'_>) -> Result<Option<String>, LogError> {
    if element.local_name().as_ref() != b"string" {
        return Ok(None);
    }
    let mut key = None;
    let mut value = None;
    for attr in element.attributes() {
        let attr = attr.map_err(|e| LogError::Xes(e.to_string()))?;
        let text = attr
            .unescape_value()
            .map_err(|e| LogError::Xes(e.to_string()))?
            .into_owned();
        match attr.key.local_name().as_ref() {
            b"key" => key = Some(text),
            b"value" => value = Some(text),
            _ => {}
        }
    }
    Ok(match key.as_deref() {
        Some("concept:name") => value,
        _ => None,
    })
}

/// Reads the variant multiset of an XES document.
///
/// Events without a `concept:name` are skipped. Traces without any named
/// event are dropped with a warning since they have no variant.
pub fn read_xes<R: BufRead>(source: R) -> Result<SimpleEventLog, LogError> {
    let mut reader = Reader::from_reader(source);
    let mut buf = Vec::new();
    let mut stack: Vec<Scope> = Vec::new();
    let mut current: Vec<Activity> = Vec::new();
    let mut pending_name: Option<String> = None;
    let mut log = SimpleEventLog::new();
    let mut dropped = 0usize;

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| LogError::Xes(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let scope = match e.local_name().as_ref() {
                    b"trace" if stack.iter().all(|&s| s == Scope::Other) => Scope::Trace,
                    b"event" if stack.last() == Some(&Scope::Trace) => Scope::Event,
                    _ => Scope::Other,
                };
                if stack.last() == Some(&Scope::Event) && pending_name.is_none() {
                    pending_name = concept_name(e)?;
                }
                match scope {
                    Scope::Trace => current.clear(),
                    Scope::Event => pending_name = None,
                    Scope::Other => {}
                }
                if empty {
                    close(
                        scope,
                        &mut current,
                        &mut pending_name,
                        &mut log,
                        &mut dropped,
                    )?;
                } else {
                    stack.push(scope);
                }
            }
            Event::End(_) => {
                let scope = stack
                    .pop()
                    .ok_or_else(|| LogError::Xes("unbalanced end tag".into()))?;
                close(
                    scope,
                    &mut current,
                    &mut pending_name,
                    &mut log,
                    &mut dropped,
                )?;
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(LogError::Xes("unexpected end of document".into()));
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} trace(s) without named events");
    }
    Ok(log)
}

fn close(
    scope: Scope,
    current: &mut Vec<Activity>,
    pending_name: &mut Option<String>,
    log: &mut SimpleEventLog,
    dropped: &mut usize,
) -> Result<(), LogError> {
    match scope {
        Scope::Event => {
            if let Some(name) = pending_name.take() {
                current.push(Activity::new(name).map_err(|e| LogError::Xes(e.to_string()))?);
            }
        }
        Scope::Trace => match TraceVariant::new(std::mem::take(current)) {
            Ok(variant) => log.add(variant, 1).expect("positive frequency"),
            Err(_) => *dropped += 1,
        },
        Scope::Other => {}
    }
    Ok(())
}
