//! Span-edit provenance for OCR-corrected text.
//!
//! Corrections are stored as events anchored to an immutable base text
//! (revision 0). A [`TrustPolicy`] selects which events to replay, [`replay`]
//! reconstructs a [`Variant`] deterministically together with an audit trace
//! and an [`OffsetMap`] between base and variant coordinates, and
//! [`analysis`] compares entity mentions extracted from different variants.
//!
//! All offsets are Unicode codepoint indices over half-open intervals.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! the review service live in the `provline` crate.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod digest;
mod error;
pub mod model;
pub mod offset;
pub mod policy;
pub mod replay;
pub mod text;

pub use error::Error;
pub use model::{
    validate_event, validate_event_set, BaseDocument, Check, EditType, EventSetReport, PageId,
    ReviewStatus, Source, Span, SpanEditEvent, ValidationReport, Verdict,
};
pub use offset::{Direction, OffsetMap, Segment};
pub use policy::TrustPolicy;
pub use replay::{reconstruct, ApplicationTrace, ConflictMode, Outcome, TraceEntry, Variant};

pub type Result<T, E = Error> = core::result::Result<T, E>;
