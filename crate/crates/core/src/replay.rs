//! Deterministic reconstruction of text variants from base-anchored events.
//!
//! [`reconstruct`] composes the stages: policy selection, overlap detection,
//! conflict resolution, ordering and application. Each stage is exposed on
//! its own for audit tooling.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::digest::{content_digest, variant_id};
use crate::model::{overlap_groups, BaseDocument, ReviewStatus, Source, Span, SpanEditEvent};
use crate::offset::{OffsetMap, Segment};
use crate::policy::{Selection, TrustPolicy};
use crate::text::{char_len, CodepointIndex};
use crate::{Error, Result};

/// What happened to one input event during reconstruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Applied,
    SkippedPolicy,
    ExcludedRejected,
    ConflictLost { winner: String },
    ConflictError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub event_id: String,
    pub span_start: usize,
    #[serde(flatten)]
    pub outcome: Outcome,
}

/// Per-event audit record of a reconstruction. Entries are ordered by
/// `(span_start, event_id)` and cover every input event exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationTrace {
    pub policy: TrustPolicy,
    pub base_digest: String,
    pub entries: Vec<TraceEntry>,
}

impl ApplicationTrace {
    pub fn applied(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|e| e.outcome == Outcome::Applied)
            .map(|e| e.event_id.as_str())
    }

    pub fn outcome_of(&self, event_id: &str) -> Option<&Outcome> {
        self.entries.iter().find(|e| e.event_id == event_id).map(|e| &e.outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub variant_id: String,
    pub doc_id: String,
    pub text: String,
    pub trace: ApplicationTrace,
    pub offset_map: OffsetMap,
}

impl Variant {
    pub fn is_applied(&self, event_id: &str) -> bool {
        self.offset_map.event_span(event_id).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictMode {
    /// Pick winners by source, review status, confidence, then event id.
    Resolve,
    /// Refuse to reconstruct and list every conflicting group.
    #[default]
    Error,
    /// Apply no member of a conflicting group.
    SkipGroup,
}

/// Events accepted by a policy and trace entries for the rest.
#[derive(Debug, Clone)]
pub struct Selected<'a> {
    pub events: Vec<&'a SpanEditEvent>,
    pub skipped: Vec<TraceEntry>,
}

fn entry(event: &SpanEditEvent, outcome: Outcome) -> TraceEntry {
    TraceEntry {
        event_id: event.event_id.clone(),
        span_start: event.span_start,
        outcome,
    }
}

pub fn select_events<'a>(events: &'a [SpanEditEvent], policy: &TrustPolicy) -> Selected<'a> {
    let mut selected = Selected {
        events: Vec::new(),
        skipped: Vec::new(),
    };
    for event in events {
        match policy.evaluate(event) {
            Selection::Selected => selected.events.push(event),
            Selection::SkippedPolicy => selected.skipped.push(entry(event, Outcome::SkippedPolicy)),
            Selection::ExcludedRejected => selected.skipped.push(entry(event, Outcome::ExcludedRejected)),
        }
    }
    selected
}

fn check_unique<'a>(events: impl IntoIterator<Item = &'a SpanEditEvent>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for e in events {
        if !seen.insert(e.event_id.as_str()) {
            return Err(Error::DuplicateEventId(e.event_id.clone()));
        }
    }
    Ok(())
}

/// Total order by `(span_start, event_id)`, independent of input order.
pub fn order_events<'a>(selected: &[&'a SpanEditEvent]) -> Result<Vec<&'a SpanEditEvent>> {
    check_unique(selected.iter().copied())?;
    let mut ordered = selected.to_vec();
    ordered.sort_by(|a, b| (a.span_start, &a.event_id).cmp(&(b.span_start, &b.event_id)));
    Ok(ordered)
}

fn source_rank(source: Source) -> u8 {
    match source {
        Source::Human => 2,
        Source::Model => 1,
        Source::Rule => 0,
    }
}

fn review_rank(status: Option<ReviewStatus>) -> u8 {
    match status {
        Some(ReviewStatus::Approved) => 2,
        Some(ReviewStatus::Unreviewed) | None => 1,
        Some(ReviewStatus::Rejected) => 0,
    }
}

fn confidence_desc(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Conflict preference; `Less` means `a` wins over `b`.
pub fn conflict_preference(a: &SpanEditEvent, b: &SpanEditEvent) -> Ordering {
    source_rank(b.source)
        .cmp(&source_rank(a.source))
        .then_with(|| review_rank(b.review_status).cmp(&review_rank(a.review_status)))
        .then_with(|| confidence_desc(a.confidence, b.confidence))
        .then_with(|| a.event_id.cmp(&b.event_id))
}

/// Outcome of resolving one overlap group.
#[derive(Debug, Clone)]
pub struct Resolution<'a> {
    pub winners: Vec<&'a SpanEditEvent>,
    pub entries: Vec<TraceEntry>,
}

/// Resolves a connected group of overlapping events.
///
/// In `Resolve` mode members are visited in preference order; each becomes a
/// winner unless it overlaps an earlier winner, in which case it loses to the
/// most preferred winner it overlaps. A group whose members all pairwise
/// overlap therefore has exactly one winner.
pub fn resolve_conflicts<'a>(group: &[&'a SpanEditEvent], mode: ConflictMode) -> Result<Resolution<'a>> {
    match mode {
        ConflictMode::Error => {
            let mut ids: Vec<String> = group.iter().map(|e| e.event_id.clone()).collect();
            ids.sort();
            Err(Error::Conflict { groups: alloc::vec![ids] })
        }
        ConflictMode::SkipGroup => Ok(Resolution {
            winners: Vec::new(),
            entries: group.iter().map(|e| entry(e, Outcome::ConflictError)).collect(),
        }),
        ConflictMode::Resolve => {
            let mut ranked = group.to_vec();
            ranked.sort_by(|a, b| conflict_preference(a, b));
            let mut winners: Vec<&SpanEditEvent> = Vec::new();
            let mut entries = Vec::with_capacity(ranked.len());
            for candidate in ranked {
                match winners.iter().find(|w| w.span().overlaps(&candidate.span())) {
                    Some(w) => entries.push(entry(
                        candidate,
                        Outcome::ConflictLost {
                            winner: w.event_id.clone(),
                        },
                    )),
                    None => {
                        winners.push(candidate);
                        entries.push(entry(candidate, Outcome::Applied));
                    }
                }
            }
            Ok(Resolution { winners, entries })
        }
    }
}

/// Text and offset map produced by replaying non-overlapping events.
#[derive(Debug, Clone, PartialEq)]
pub struct Replayed {
    pub text: String,
    pub offset_map: OffsetMap,
}

/// Replaces each event's base span with its `new_text`.
///
/// Events must be pairwise non-overlapping. Composition is by base position:
/// inserts at `p` land before a span starting at `p`, and several inserts at
/// the same point appear in `event_id` order.
pub fn apply_events(doc: &BaseDocument, events: &[&SpanEditEvent]) -> Result<Replayed> {
    check_unique(events.iter().copied())?;
    let index = CodepointIndex::new(&doc.text);
    let base_len = index.len();

    let mut ordered = events.to_vec();
    ordered.sort_by(|a, b| (a.span_start, a.span_end, &a.event_id).cmp(&(b.span_start, b.span_end, &b.event_id)));

    let mut text = String::with_capacity(doc.text.len());
    let mut segments = Vec::with_capacity(ordered.len() * 2 + 1);
    let mut cursor = 0usize;
    let mut vpos = 0usize;
    let mut last: Option<&SpanEditEvent> = None;

    for event in ordered {
        if event.doc_id != doc.doc_id {
            return Err(Error::DocumentMismatch {
                event_id: event.event_id.clone(),
                expected: doc.doc_id.clone(),
                found: event.doc_id.clone(),
            });
        }
        let (start, end) = (event.span_start, event.span_end);
        if start > end || end > base_len {
            return Err(Error::EventOutOfBounds {
                event_id: event.event_id.clone(),
                start,
                end,
                len: base_len,
            });
        }
        if start < cursor {
            return Err(Error::OverlappingEvents {
                first: last.map(|e| e.event_id.clone()).unwrap_or_default(),
                second: event.event_id.clone(),
            });
        }
        let found = index.slice(start, end).expect("bounds checked");
        if found != event.orig_text {
            return Err(Error::Integrity {
                event_id: event.event_id.clone(),
                expected: event.orig_text.clone(),
                found: found.into(),
            });
        }
        if start > cursor {
            text.push_str(index.slice(cursor, start).expect("bounds checked"));
            segments.push(Segment {
                base: Span::new(cursor, start),
                variant: Span::new(vpos, vpos + (start - cursor)),
                event_id: None,
            });
            vpos += start - cursor;
        }
        let new_len = char_len(&event.new_text);
        text.push_str(&event.new_text);
        segments.push(Segment {
            base: Span::new(start, end),
            variant: Span::new(vpos, vpos + new_len),
            event_id: Some(event.event_id.clone()),
        });
        vpos += new_len;
        cursor = end;
        last = Some(event);
    }
    if cursor < base_len {
        text.push_str(index.slice(cursor, base_len).expect("bounds checked"));
        segments.push(Segment {
            base: Span::new(cursor, base_len),
            variant: Span::new(vpos, vpos + (base_len - cursor)),
            event_id: None,
        });
        vpos += base_len - cursor;
    }
    Ok(Replayed {
        text,
        offset_map: OffsetMap::from_segments(segments, base_len, vpos),
    })
}

/// Builds the variant of `doc` selected by `policy`.
pub fn reconstruct(
    doc: &BaseDocument,
    events: &[SpanEditEvent],
    policy: &TrustPolicy,
    mode: ConflictMode,
) -> Result<Variant> {
    for e in events {
        if e.doc_id != doc.doc_id {
            return Err(Error::DocumentMismatch {
                event_id: e.event_id.clone(),
                expected: doc.doc_id.clone(),
                found: e.doc_id.clone(),
            });
        }
    }
    check_unique(events)?;

    let Selected { events: selected, mut skipped } = select_events(events, policy);
    let spans: Vec<Span> = selected.iter().map(|e| e.span()).collect();
    let groups = overlap_groups(&spans);

    if mode == ConflictMode::Error && !groups.is_empty() {
        let groups = groups
            .iter()
            .map(|g| {
                let mut ids: Vec<String> = g.iter().map(|&i| selected[i].event_id.clone()).collect();
                ids.sort();
                ids
            })
            .collect();
        return Err(Error::Conflict { groups });
    }

    let mut in_group = alloc::vec![false; selected.len()];
    let mut to_apply: Vec<&SpanEditEvent> = Vec::with_capacity(selected.len());
    let mut entries = Vec::with_capacity(events.len());
    for group in &groups {
        let members: Vec<&SpanEditEvent> = group.iter().map(|&i| selected[i]).collect();
        for &i in group {
            in_group[i] = true;
        }
        let resolution = resolve_conflicts(&members, mode)?;
        to_apply.extend(resolution.winners);
        entries.extend(resolution.entries.into_iter().filter(|e| e.outcome != Outcome::Applied));
    }
    to_apply.extend(selected.iter().enumerate().filter(|(i, _)| !in_group[*i]).map(|(_, e)| *e));

    let ordered = order_events(&to_apply)?;
    let replayed = apply_events(doc, &ordered)?;

    entries.extend(ordered.iter().map(|e| entry(e, Outcome::Applied)));
    entries.append(&mut skipped);
    entries.sort_by(|a, b| (a.span_start, &a.event_id).cmp(&(b.span_start, &b.event_id)));

    let base_digest = content_digest(&doc.text);
    let descriptor = policy.descriptor();
    let applied: Vec<&str> = ordered.iter().map(|e| e.event_id.as_str()).collect();
    Ok(Variant {
        variant_id: variant_id(&doc.doc_id, &base_digest, &descriptor, &applied),
        doc_id: doc.doc_id.clone(),
        text: replayed.text,
        trace: ApplicationTrace {
            policy: policy.clone(),
            base_digest,
            entries,
        },
        offset_map: replayed.offset_map,
    })
}
