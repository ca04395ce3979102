//! CSV export of events.
//!
//! One header row, then one row per event with the schema fields as
//! columns. Absent optional values are empty cells. Quoting follows RFC 4180:
//! cells containing a comma, a double quote or a line break are wrapped in
//! double quotes and embedded quotes are doubled. A `page_id` cell that
//! parses as an integer reads back as a number. Preserved unknown fields are
//! not exported.

use std::path::Path;

use provline_core::{EditType, PageId, ReviewStatus, Source, SpanEditEvent};

use super::{write_atomic, IoError, Result};

pub const TABULAR_COLUMNS: [&str; 16] = [
    "schema_version",
    "event_id",
    "doc_id",
    "page_id",
    "base_revision",
    "span_start",
    "span_end",
    "orig_text",
    "new_text",
    "edit_type",
    "source",
    "confidence",
    "review_status",
    "reviewer_id",
    "layout_zone",
    "note",
];

fn row(e: &SpanEditEvent) -> [String; 16] {
    let opt = |v: &Option<String>| v.clone().unwrap_or_default();
    [
        e.schema_version.clone(),
        e.event_id.clone(),
        e.doc_id.clone(),
        e.page_id.to_string(),
        e.base_revision.to_string(),
        e.span_start.to_string(),
        e.span_end.to_string(),
        e.orig_text.clone(),
        e.new_text.clone(),
        e.edit_type.as_str().into(),
        e.source.as_str().into(),
        e.confidence.map(|c| c.to_string()).unwrap_or_default(),
        e.review_status.map(|s| s.as_str().to_owned()).unwrap_or_default(),
        opt(&e.reviewer_id),
        opt(&e.layout_zone),
        opt(&e.note),
    ]
}

pub fn write_tabular<W: std::io::Write>(out: W, events: &[SpanEditEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABULAR_COLUMNS)?;
    for e in events {
        w.write_record(row(e))?;
    }
    w.flush().map_err(IoError::file("<csv>"))?;
    Ok(())
}

pub fn export_tabular(events: &[SpanEditEvent], path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    write_tabular(&mut bytes, events)?;
    write_atomic(path, &bytes)
}

fn parse<T: std::str::FromStr>(cell: &str, column: &str, line: usize) -> Result<T> {
    cell.parse().map_err(|_| IoError::Invalid {
        line,
        message: format!("bad {column} value {cell:?}"),
    })
}

fn enum_cell<T: serde::de::DeserializeOwned>(cell: &str, column: &str, line: usize) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(cell.into())).map_err(|_| IoError::Invalid {
        line,
        message: format!("bad {column} value {cell:?}"),
    })
}

fn optional(cell: &str) -> Option<String> {
    (!cell.is_empty()).then(|| cell.to_owned())
}

pub fn parse_tabular<R: std::io::Read>(input: R) -> Result<Vec<SpanEditEvent>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(TABULAR_COLUMNS) {
        return Err(IoError::Invalid {
            line: 1,
            message: "unexpected CSV header".into(),
        });
    }
    let mut events = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let c = |i: usize| record.get(i).unwrap_or_default();
        let page_id = match c(3).parse::<i64>() {
            Ok(n) => PageId::Number(n),
            Err(_) => PageId::Text(c(3).into()),
        };
        events.push(SpanEditEvent {
            schema_version: c(0).into(),
            event_id: c(1).into(),
            doc_id: c(2).into(),
            page_id,
            base_revision: parse(c(4), "base_revision", line)?,
            span_start: parse(c(5), "span_start", line)?,
            span_end: parse(c(6), "span_end", line)?,
            orig_text: c(7).into(),
            new_text: c(8).into(),
            edit_type: enum_cell::<EditType>(c(9), "edit_type", line)?,
            source: enum_cell::<Source>(c(10), "source", line)?,
            confidence: optional(c(11)).map(|v| parse(&v, "confidence", line)).transpose()?,
            review_status: optional(c(12))
                .map(|v| enum_cell::<ReviewStatus>(&v, "review_status", line))
                .transpose()?,
            reviewer_id: optional(c(13)),
            layout_zone: optional(c(14)),
            note: optional(c(15)),
            extra: Default::default(),
        });
    }
    Ok(events)
}

pub fn read_tabular(path: &Path) -> Result<Vec<SpanEditEvent>> {
    let file = std::fs::File::open(path).map_err(IoError::file(path))?;
    parse_tabular(file).map_err(|e| e.in_file(path))
}
