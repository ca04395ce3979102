use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::Path;

use provline_core::analysis::EntityMention;
use provline_core::SpanEditEvent;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use super::{write_atomic, IoError, Result};

/// Required keys of a mention record.
pub const MENTION_FIELDS: [&str; 6] = ["doc_id", "variant_id", "start", "end", "surface", "label"];

/// A record together with the 1-based line it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Located<T> {
    pub line: usize,
    pub record: T,
}

pub type LocatedEvent = Located<SpanEditEvent>;

/// Streaming JSONL reader yielding one record per non-blank line.
pub struct JsonlReader<R, T> {
    input: R,
    buf: String,
    line: usize,
    required: &'static [&'static str],
    _record: PhantomData<T>,
}

pub type EventReader<R> = JsonlReader<R, SpanEditEvent>;

impl<R: BufRead, T: DeserializeOwned> JsonlReader<R, T> {
    pub fn new(input: R, required: &'static [&'static str]) -> Self {
        JsonlReader {
            input,
            buf: String::new(),
            line: 0,
            required,
            _record: PhantomData,
        }
    }
}

impl<R: BufRead> EventReader<R> {
    pub fn events(input: R) -> Self {
        JsonlReader::new(input, &SpanEditEvent::REQUIRED_FIELDS)
    }
}

fn parse_record<T: DeserializeOwned>(text: &str, line: usize, required: &[&'static str]) -> Result<T> {
    let object: Map<String, Value> = serde_json::from_str(text).map_err(|source| IoError::Json { line, source })?;
    if let Some(field) = required.iter().find(|f| !object.contains_key(**f)) {
        return Err(IoError::MissingField { field, line });
    }
    serde_json::from_value(Value::Object(object)).map_err(|e| IoError::Invalid {
        line,
        message: e.to_string(),
    })
}

impl<R: BufRead, T: DeserializeOwned> Iterator for JsonlReader<R, T> {
    type Item = Result<Located<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) if e.kind() == std::io::ErrorKind::InvalidData => return Some(Err(IoError::NotUtf8)),
                Err(source) => {
                    return Some(Err(IoError::File {
                        path: "<input>".into(),
                        source,
                    }))
                }
            }
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            let line = self.line;
            return Some(parse_record(text, line, self.required).map(|record| Located { line, record }));
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(IoError::file(path))
}

/// Reads every event of a JSONL file, keeping line numbers.
pub fn read_located_events(path: &Path) -> Result<Vec<LocatedEvent>> {
    EventReader::events(open(path)?)
        .collect::<Result<_>>()
        .map_err(|e| e.in_file(path))
}

pub fn read_events_jsonl(path: &Path) -> Result<Vec<SpanEditEvent>> {
    Ok(read_located_events(path)?.into_iter().map(|l| l.record).collect())
}

pub fn read_mentions_jsonl(path: &Path) -> Result<Vec<EntityMention>> {
    JsonlReader::<_, EntityMention>::new(open(path)?, &MENTION_FIELDS)
        .map(|r| r.map(|l| l.record))
        .collect::<Result<_>>()
        .map_err(|e| e.in_file(path))
}

/// Serializes records one per line. Known fields keep their schema order and
/// preserved unknown fields follow in key order, so output is diff-stable.
pub fn write_jsonl<W: Write, T: Serialize>(out: W, records: &[T]) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn write_jsonl_file<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut bytes = Vec::new();
    write_jsonl(&mut bytes, records).map_err(IoError::file(path))?;
    write_atomic(path, &bytes)
}

pub fn write_events_jsonl(events: &[SpanEditEvent], path: &Path) -> Result<()> {
    write_jsonl_file(path, events)
}

pub fn write_mentions_jsonl(mentions: &[EntityMention], path: &Path) -> Result<()> {
    write_jsonl_file(path, mentions)
}
