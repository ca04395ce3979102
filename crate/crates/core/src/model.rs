//! Domain types of the span-edit provenance schema and record-level checks.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::text::{char_len, CodepointIndex};
use crate::{Error, Result};

/// Page identifier, carried opaquely. JSON accepts either an integer or a string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PageId {
    Number(i64),
    Text(String),
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PageId::Number(n) => write!(f, "{n}"),
            PageId::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for PageId {
    fn from(n: i64) -> Self {
        PageId::Number(n)
    }
}

impl From<&str> for PageId {
    fn from(s: &str) -> Self {
        PageId::Text(s.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditType {
    Substitute,
    Insert,
    Delete,
    Split,
    Merge,
    Normalize,
}

impl EditType {
    pub const ALL: [EditType; 6] = [
        EditType::Substitute,
        EditType::Insert,
        EditType::Delete,
        EditType::Split,
        EditType::Merge,
        EditType::Normalize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EditType::Substitute => "substitute",
            EditType::Insert => "insert",
            EditType::Delete => "delete",
            EditType::Split => "split",
            EditType::Merge => "merge",
            EditType::Normalize => "normalize",
        }
    }

    /// Split and merge move token boundaries.
    pub fn affects_boundaries(self) -> bool {
        matches!(self, EditType::Split | EditType::Merge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Rule,
    Model,
    Human,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Rule => "rule",
            Source::Model => "model",
            Source::Human => "human",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewStatus {
    Unreviewed,
    Approved,
    Rejected,
}

impl ReviewStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReviewStatus::Unreviewed => "unreviewed",
            ReviewStatus::Approved => "approved",
            ReviewStatus::Rejected => "rejected",
        }
    }
}

/// Half-open codepoint interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub const fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub const fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Overlap under half-open semantics. Adjacent spans never overlap; a
    /// zero-width span at `p` overlaps a non-empty span only when `p` lies
    /// strictly inside it; two zero-width spans never overlap.
    pub fn overlaps(&self, other: &Span) -> bool {
        match (self.is_empty(), other.is_empty()) {
            (false, false) => self.start < other.end && other.start < self.end,
            (true, false) => other.start < self.start && self.start < other.end,
            (false, true) => self.start < other.start && other.start < self.end,
            (true, true) => false,
        }
    }

    /// Smallest span covering both.
    pub fn hull(&self, other: &Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

/// A base text (revision 0) against which every event is anchored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseDocument {
    pub doc_id: String,
    pub page_id: PageId,
    pub base_revision: u64,
    pub text: String,
}

impl BaseDocument {
    /// Builds a revision-0 document. The text is kept verbatim.
    pub fn new(doc_id: impl Into<String>, page_id: PageId, text: impl Into<String>) -> Result<Self> {
        let doc_id = doc_id.into();
        if doc_id.is_empty() {
            return Err(Error::EmptyDocumentId);
        }
        Ok(Self {
            doc_id,
            page_id,
            base_revision: 0,
            text: text.into(),
        })
    }

    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }
}

/// One base-anchored correction with its lineage metadata.
///
/// Fields not known to this schema version are kept in `extra` and written
/// back unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanEditEvent {
    pub schema_version: String,
    pub event_id: String,
    pub doc_id: String,
    pub page_id: PageId,
    pub base_revision: u64,
    pub span_start: usize,
    pub span_end: usize,
    pub orig_text: String,
    pub new_text: String,
    pub edit_type: EditType,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review_status: Option<ReviewStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewer_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout_zone: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl SpanEditEvent {
    /// Required fields of the JSON record, in canonical order.
    pub const REQUIRED_FIELDS: [&'static str; 11] = [
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
    ];

    pub fn span(&self) -> Span {
        Span::new(self.span_start, self.span_end)
    }

    pub fn is_approved(&self) -> bool {
        self.review_status == Some(ReviewStatus::Approved)
    }

    pub fn is_rejected(&self) -> bool {
        self.review_status == Some(ReviewStatus::Rejected)
    }
}

/// Named record-level checks reported by [`validate_event`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    OffsetBounds,
    SpanShape,
    Integrity,
    EditTypeConsistency,
    ConfidenceRange,
    SchemaVersion,
    BaseRevision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: Check,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub event_id: String,
    pub verdicts: Vec<Verdict>,
    pub overall: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSetReport {
    pub reports: Vec<ValidationReport>,
    /// Connected groups of overlapping events, members ordered by
    /// `(span_start, event_id)`.
    pub overlap_groups: Vec<Vec<String>>,
}

impl EventSetReport {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.overall)
    }
}

/// Accepts `MAJOR.MINOR.PATCH` with an optional `-pre` / `+build` suffix and
/// returns the major version.
pub fn schema_major(version: &str) -> Option<u64> {
    let core = version.split(['-', '+']).next()?;
    let mut parts = core.split('.');
    let mut nums = [0u64; 3];
    for slot in nums.iter_mut() {
        let part = parts.next()?;
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        *slot = part.parse().ok()?;
    }
    if parts.next().is_some() {
        return None;
    }
    Some(nums[0])
}

pub const SUPPORTED_SCHEMA_MAJOR: u64 = 1;

fn verdict(check: Check, failure: Option<String>) -> Verdict {
    match failure {
        None => Verdict {
            check,
            passed: true,
            message: "ok".to_string(),
        },
        Some(message) => Verdict {
            check,
            passed: false,
            message,
        },
    }
}

fn validate_indexed(event: &SpanEditEvent, doc: &BaseDocument, index: &CodepointIndex<'_>) -> ValidationReport {
    let len = index.len();
    let (start, end) = (event.span_start, event.span_end);
    let in_bounds = start <= end && end <= len;

    let mut verdicts = Vec::with_capacity(7);
    verdicts.push(verdict(
        Check::OffsetBounds,
        (!in_bounds).then(|| format!("span [{start}, {end}) is not within [0, {len}]")),
    ));

    let shape_failure = if start > end {
        Some(format!("span_start {start} exceeds span_end {end}"))
    } else if start == end && event.edit_type != EditType::Insert {
        Some(format!(
            "zero-width span at {start} is only allowed for insert, not {}",
            event.edit_type.as_str()
        ))
    } else if start < end && event.edit_type == EditType::Insert {
        Some(format!("insert must have a zero-width span, got [{start}, {end})"))
    } else {
        None
    };
    verdicts.push(verdict(Check::SpanShape, shape_failure));

    let integrity_failure = match index.slice(start, end) {
        Some(found) if found == event.orig_text => None,
        Some(found) => Some(format!(
            "orig_text {:?} does not match base substring {:?}",
            event.orig_text, found
        )),
        None => Some("span cannot be resolved against the base text".to_string()),
    };
    verdicts.push(verdict(Check::Integrity, integrity_failure));

    let edit_failure = match event.edit_type {
        EditType::Delete if !event.new_text.is_empty() => {
            Some("delete must have an empty new_text".to_string())
        }
        EditType::Insert if event.new_text.is_empty() => {
            Some("insert must have a non-empty new_text".to_string())
        }
        _ => None,
    };
    verdicts.push(verdict(Check::EditTypeConsistency, edit_failure));

    let confidence_failure = match event.confidence {
        Some(c) if !(0.0..=1.0).contains(&c) => Some(format!("confidence {c} is outside [0, 1]")),
        _ => None,
    };
    verdicts.push(verdict(Check::ConfidenceRange, confidence_failure));

    let version_failure = match schema_major(&event.schema_version) {
        Some(SUPPORTED_SCHEMA_MAJOR) => None,
        Some(major) => Some(format!(
            "schema major version {major} is not supported (expected {SUPPORTED_SCHEMA_MAJOR}.x)"
        )),
        None => Some(format!("schema_version {:?} is not a semantic version", event.schema_version)),
    };
    verdicts.push(verdict(Check::SchemaVersion, version_failure));

    verdicts.push(verdict(
        Check::BaseRevision,
        (event.base_revision != doc.base_revision).then(|| {
            format!(
                "event anchors to revision {} but the base document is revision {}",
                event.base_revision, doc.base_revision
            )
        }),
    ));

    let overall = verdicts.iter().all(|v| v.passed);
    ValidationReport {
        event_id: event.event_id.clone(),
        verdicts,
        overall,
    }
}

fn check_same_doc(event: &SpanEditEvent, doc: &BaseDocument) -> Result<()> {
    if event.doc_id != doc.doc_id {
        return Err(Error::DocumentMismatch {
            event_id: event.event_id.clone(),
            expected: doc.doc_id.clone(),
            found: event.doc_id.clone(),
        });
    }
    Ok(())
}

/// Runs every record-level check on one event.
pub fn validate_event(event: &SpanEditEvent, doc: &BaseDocument) -> Result<ValidationReport> {
    check_same_doc(event, doc)?;
    Ok(validate_indexed(event, doc, &CodepointIndex::new(&doc.text)))
}

/// Validates every event of one document and reports overlapping groups.
pub fn validate_event_set(events: &[SpanEditEvent], doc: &BaseDocument) -> Result<EventSetReport> {
    let mut seen = BTreeSet::new();
    for event in events {
        check_same_doc(event, doc)?;
        if !seen.insert(event.event_id.as_str()) {
            return Err(Error::DuplicateEventId(event.event_id.clone()));
        }
    }
    let index = CodepointIndex::new(&doc.text);
    let reports = events.iter().map(|e| validate_indexed(e, doc, &index)).collect();

    // Reversed spans are reported above and left out of overlap detection.
    let candidates: Vec<&SpanEditEvent> = events.iter().filter(|e| e.span_start <= e.span_end).collect();
    let spans: Vec<Span> = candidates.iter().map(|e| e.span()).collect();
    let overlap_groups = overlap_groups(&spans)
        .into_iter()
        .map(|group| {
            let mut members: Vec<&SpanEditEvent> = group.into_iter().map(|i| candidates[i]).collect();
            members.sort_by(|a, b| (a.span_start, &a.event_id).cmp(&(b.span_start, &b.event_id)));
            members.into_iter().map(|e| e.event_id.clone()).collect()
        })
        .collect();
    Ok(EventSetReport {
        reports,
        overlap_groups,
    })
}

/// All overlapping index pairs `(i, j)` with `i < j`, found by a sweep over
/// spans sorted by `(start, end)`.
pub fn overlap_pairs(spans: &[Span]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by_key(|&i| (spans[i].start, spans[i].end, i));

    let mut pairs = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let a = spans[i];
        if a.is_empty() {
            continue;
        }
        for &j in &order[pos + 1..] {
            let b = spans[j];
            if b.start >= a.end {
                break;
            }
            if !b.is_empty() || a.start < b.start {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Connected components (size ≥ 2) of the overlap relation, each sorted by
/// index, components ordered by their smallest member.
pub fn overlap_groups(spans: &[Span]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..spans.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, j) in overlap_pairs(spans) {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..spans.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().filter(|g| g.len() > 1).collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn event(id: &str, start: usize, end: usize, orig: &str, new: &str, edit_type: EditType) -> SpanEditEvent {
        SpanEditEvent {
            schema_version: "1.0.0".into(),
            event_id: id.into(),
            doc_id: "doc".into(),
            page_id: PageId::Number(1),
            base_revision: 0,
            span_start: start,
            span_end: end,
            orig_text: orig.into(),
            new_text: new.into(),
            edit_type,
            source: Source::Model,
            confidence: None,
            review_status: None,
            reviewer_id: None,
            layout_zone: None,
            note: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn doc(text: &str) -> BaseDocument {
        BaseDocument::new("doc", PageId::Number(1), text).unwrap()
    }
}
