//! File formats and corpus layout.
//!
//! Events and mentions are JSONL, one record per line. Review decisions go
//! to an append-only JSONL log next to the events file and are merged on
//! read, so the events file itself is never rewritten.

mod atomic;
pub mod corpus;
pub mod decisions;
pub mod jsonl;
pub mod tabular;

use std::path::PathBuf;

pub use atomic::{write_atomic, write_json_atomic};
pub use corpus::{read_text, Corpus, ManifestEntry};
pub use decisions::{append_decision, merge_decisions, read_decisions, ReviewDecision};
pub use jsonl::{
    read_events_jsonl, read_located_events, read_mentions_jsonl, write_events_jsonl, write_jsonl, write_mentions_jsonl,
    EventReader, Located, LocatedEvent,
};
pub use tabular::{export_tabular, read_tabular, TABULAR_COLUMNS};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<IoError>,
    },
    #[error("malformed JSON at line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing required field {field} at line {line}")]
    MissingField { field: &'static str, line: usize },
    #[error("invalid record at line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("text begins with a byte-order mark")]
    ByteOrderMark,
    #[error("text is not valid UTF-8")]
    NotUtf8,
    #[error("digest mismatch for {doc_id}: manifest has {expected}, file has {found}")]
    DigestMismatch {
        doc_id: String,
        expected: String,
        found: String,
    },
    #[error("duplicate document {0} in manifest")]
    DuplicateDocument(String),
    #[error("decision at line {line} refers to unknown event {event_id}")]
    UnknownEvent { event_id: String, line: usize },
    #[error("invalid timestamp {timestamp:?} in decision at line {line}")]
    Timestamp { timestamp: String, line: usize },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] provline_core::Error),
}

impl IoError {
    pub(crate) fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> IoError {
        let path = path.into();
        move |source| IoError::File { path, source }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> IoError {
        match self {
            already @ (IoError::File { .. } | IoError::InFile { .. }) => already,
            other => IoError::InFile {
                path: path.into(),
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;
