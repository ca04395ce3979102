use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Span;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("event {event_id} references document {found} but was checked against {expected}")]
    DocumentMismatch {
        event_id: String,
        expected: String,
        found: String,
    },
    #[error("document id must not be empty")]
    EmptyDocumentId,
    #[error("duplicate event_id {0}")]
    DuplicateEventId(String),
    #[error("unresolved conflicts, adjudication required: {groups:?}")]
    Conflict { groups: Vec<Vec<String>> },
    #[error("event {event_id}: orig_text {expected:?} does not match base text {found:?}")]
    Integrity {
        event_id: String,
        expected: String,
        found: String,
    },
    #[error("event {event_id}: span [{start}, {end}) is outside the base text of length {len}")]
    EventOutOfBounds {
        event_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("events {first} and {second} overlap and cannot both be applied")]
    OverlappingEvents { first: String, second: String },
    #[error("span {span:?} is outside a text of length {len}")]
    SpanOutOfBounds { span: Span, len: usize },
    #[error("lineage mismatch: {0}")]
    LineageMismatch(String),
    #[error("mention [{start}, {end}) {surface:?} does not match variant {variant_id}")]
    MentionMismatch {
        variant_id: String,
        start: usize,
        end: usize,
        surface: String,
    },
    #[error("requested {requested} samples from a population of {population}")]
    SampleTooLarge { requested: usize, population: usize },
    #[error("worksheet rows without a judgment: {row_ids:?}")]
    Unjudged { row_ids: Vec<usize> },
    #[error("worksheet has no rows")]
    EmptyWorksheet,
    #[error("label refers to unknown volatility record {0}")]
    UnknownRecord(String),
    #[error("no mentions for document {doc_id} under policy {policy}")]
    MissingRun { policy: String, doc_id: String },
    #[error("baseline policy {0} is not part of the sweep")]
    UnknownBaseline(String),
}
