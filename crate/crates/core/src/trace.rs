// SPDX-License-Identifier: Apache-2.0

//! Contact and content trace records and their CSV forms.
//!
//! Contact traces are `time_s,agent_a,agent_b`; content traces are
//! `time_s,agent,item_key,tags` with tags separated by `;`. A header line
//! matching the column names is optional on input and always written on
//! output. Blank lines and lines starting with `#` are skipped.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::graph::Timestamp;

pub const CONTACT_HEADER: &str = "time_s,agent_a,agent_b";
pub const CONTENT_HEADER: &str = "time_s,agent,item_key,tags";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactEvent {
    pub time: Timestamp,
    pub a: String,
    pub b: String,
}

impl ContactEvent {
    pub fn new(time: Timestamp, a: impl Into<String>, b: impl Into<String>) -> Self {
        Self { time, a: a.into(), b: b.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentEvent {
    pub time: Timestamp,
    pub creator: String,
    pub item: String,
    pub tags: Vec<String>,
}

impl ContentEvent {
    pub fn new<S: Into<String>>(
        time: Timestamp,
        creator: impl Into<String>,
        item: impl Into<String>,
        tags: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            time,
            creator: creator.into(),
            item: item.into(),
            tags: tags.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn records<R: BufRead>(input: R, header: &str) -> impl Iterator<Item = Result<(usize, String), TraceError>> {
    let header = header.to_owned();
    input.lines().enumerate().filter_map(move |(idx, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(line) => {
            let line = line.strip_suffix('\r').unwrap_or(&line).to_owned();
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || (idx == 0 && trimmed == header) {
                None
            } else {
                Some(Ok((idx + 1, line)))
            }
        }
    })
}

fn parse_time(field: &str, line: usize) -> Result<Timestamp, TraceError> {
    let time: Timestamp = field.trim().parse().map_err(|_| TraceError::Parse {
        line,
        message: format!("invalid time `{field}`"),
    })?;
    if time < 0 {
        return Err(TraceError::Parse { line, message: format!("negative time {time}") });
    }
    Ok(time)
}

fn key(field: &str, what: &str, line: usize) -> Result<String, TraceError> {
    let k = field.trim();
    if k.is_empty() {
        return Err(TraceError::Parse { line, message: format!("empty {what}") });
    }
    Ok(k.to_owned())
}

pub fn read_contacts<R: BufRead>(input: R) -> Result<Vec<ContactEvent>, TraceError> {
    let mut out = Vec::new();
    for rec in records(input, CONTACT_HEADER) {
        let (line, text) = rec?;
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(TraceError::Parse {
                line,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let time = parse_time(fields[0], line)?;
        let a = key(fields[1], "agent", line)?;
        let b = key(fields[2], "agent", line)?;
        if a == b {
            return Err(TraceError::Parse { line, message: format!("self-contact of `{a}`") });
        }
        out.push(ContactEvent { time, a, b });
    }
    Ok(out)
}

pub fn read_contents<R: BufRead>(input: R) -> Result<Vec<ContentEvent>, TraceError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in records(input, CONTENT_HEADER) {
        let (line, text) = rec?;
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 4 {
            return Err(TraceError::Parse {
                line,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let time = parse_time(fields[0], line)?;
        let creator = key(fields[1], "agent", line)?;
        let item = key(fields[2], "item key", line)?;
        let tags: Vec<String> = fields[3]
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect();
        if tags.is_empty() {
            return Err(TraceError::Parse { line, message: format!("item `{item}` has no tags") });
        }
        if !seen.insert(item.clone()) {
            return Err(TraceError::Parse { line, message: format!("duplicate item `{item}`") });
        }
        out.push(ContentEvent { time, creator, item, tags });
    }
    Ok(out)
}

pub fn write_contacts<W: Write>(mut out: W, events: &[ContactEvent]) -> std::io::Result<()> {
    writeln!(out, "{CONTACT_HEADER}")?;
    for e in events {
        writeln!(out, "{},{},{}", e.time, e.a, e.b)?;
    }
    Ok(())
}

pub fn write_contents<W: Write>(mut out: W, events: &[ContentEvent]) -> std::io::Result<()> {
    writeln!(out, "{CONTENT_HEADER}")?;
    for e in events {
        writeln!(out, "{},{},{},{}", e.time, e.creator, e.item, e.tags.join(";"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_header_and_comments() {
        let text = "time_s,agent_a,agent_b\n# warmup\n\n60,a,b\r\n120, b ,c\n";
        let got = read_contacts(text.as_bytes()).unwrap();
        assert_eq!(got, vec![ContactEvent::new(60, "a", "b"), ContactEvent::new(120, "b", "c")]);
    }

    #[test]
    fn contact_errors_cite_lines() {
        for (text, want) in [
            ("0,a,a\n", 1),
            ("0,a,b\nx,a,b\n", 2),
            ("0,a\n", 1),
            ("# c\n-5,a,b\n", 2),
            ("0,,b\n", 1),
        ] {
            match read_contacts(text.as_bytes()) {
                Err(TraceError::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn content_parsing() {
        let text = "time_s,agent,item_key,tags\n0,a,i1,x;y\n60,b,i2,z;\n";
        let got = read_contents(text.as_bytes()).unwrap();
        assert_eq!(got[0], ContentEvent::new(0, "a", "i1", ["x", "y"]));
        assert_eq!(got[1].tags, vec!["z".to_string()]);
    }

    #[test]
    fn content_errors() {
        for (text, want) in [("0,a,i1,\n", 1), ("0,a,i1,x\n5,b,i1,y\n", 2), ("0,a,i1\n", 1)] {
            match read_contents(text.as_bytes()) {
                Err(TraceError::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    fn key_strategy() -> impl Strategy<Value = String> {
        "[a-z0-9_]{1,6}"
    }

    proptest! {
        #[test]
        fn contact_round_trip(raw in prop::collection::vec((0i64..100_000, key_strategy(), key_strategy()), 0..20)) {
            let events: Vec<ContactEvent> = raw
                .into_iter()
                .filter(|(_, a, b)| a != b)
                .map(|(t, a, b)| ContactEvent::new(t, a, b))
                .collect();
            let mut buf = Vec::new();
            write_contacts(&mut buf, &events).unwrap();
            prop_assert_eq!(read_contacts(&buf[..]).unwrap(), events);
        }

        #[test]
        fn content_round_trip(raw in prop::collection::vec(
            (0i64..100_000, key_strategy(), prop::collection::vec(key_strategy(), 1..5)), 0..20)
        ) {
            let events: Vec<ContentEvent> = raw
                .into_iter()
                .enumerate()
                .map(|(n, (t, c, tags))| ContentEvent::new(t, c, format!("item{n}"), tags))
                .collect();
            let mut buf = Vec::new();
            write_contents(&mut buf, &events).unwrap();
            prop_assert_eq!(read_contents(&buf[..]).unwrap(), events);
        }
    }
}
