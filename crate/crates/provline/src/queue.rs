//! Review triage.
//!
//! An event's priority is the weighted share of provenance signals it
//! raises: `sum(w_i * flag_i) / sum(w_i)`, in `[0, 1]`. Default weights
//! follow the relative lifts observed for each signal (split/merge 3.3, low
//! confidence 2.7, non-body zone 2.6, unreviewed 1.7). Events raising no
//! signal are not queued. Ties are broken by event id.

use std::collections::BTreeMap;

use provline_core::analysis::{Signal, CONTEXT_RADIUS};
use provline_core::text::CodepointIndex;
use provline_core::{BaseDocument, ReviewStatus, SpanEditEvent};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityWeights {
    pub split_merge: f64,
    pub low_confidence: f64,
    pub non_body_zone: f64,
    pub unreviewed: f64,
    pub low_confidence_threshold: f64,
}

impl Default for PriorityWeights {
    fn default() -> Self {
        PriorityWeights {
            split_merge: 3.3,
            low_confidence: 2.7,
            non_body_zone: 2.6,
            unreviewed: 1.7,
            low_confidence_threshold: 0.70,
        }
    }
}

impl PriorityWeights {
    fn signals(&self) -> [(Signal, f64); 4] {
        [
            (Signal::SplitMerge, self.split_merge),
            (
                Signal::LowConfidence {
                    threshold: self.low_confidence_threshold,
                },
                self.low_confidence,
            ),
            (Signal::NonBodyZone, self.non_body_zone),
            (Signal::Unreviewed, self.unreviewed),
        ]
    }

    /// Score and names of the raised signals.
    pub fn score(&self, event: &SpanEditEvent) -> (f64, Vec<String>) {
        let signals = self.signals();
        let total: f64 = signals.iter().map(|(_, w)| w).sum();
        let mut raised = 0.0;
        let mut names = Vec::new();
        for (signal, weight) in &signals {
            if signal.flags(event) {
                raised += weight;
                names.push(signal.name());
            }
        }
        let score = if total > 0.0 { raised / total } else { 0.0 };
        (score, names)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueItem {
    pub event_id: String,
    pub doc_id: String,
    pub priority: f64,
    pub signals: Vec<String>,
    pub review_status: ReviewStatus,
    /// Base text around the event, `CONTEXT_RADIUS` codepoints each side.
    pub context: String,
    pub context_start: usize,
    pub context_end: usize,
    pub event: SpanEditEvent,
}

pub fn review_queue(
    documents: &BTreeMap<String, BaseDocument>,
    events: &[SpanEditEvent],
    weights: &PriorityWeights,
    limit: usize,
) -> Vec<QueueItem> {
    let mut items: Vec<QueueItem> = events
        .iter()
        .filter_map(|e| {
            let (priority, signals) = weights.score(e);
            if priority <= 0.0 {
                return None;
            }
            let (context, context_start, context_end) = match documents.get(&e.doc_id) {
                Some(doc) => {
                    let index = CodepointIndex::new(&doc.text);
                    let lo = e.span_start.saturating_sub(CONTEXT_RADIUS).min(index.len());
                    let hi = (e.span_end + CONTEXT_RADIUS).min(index.len()).max(lo);
                    (index.slice(lo, hi).unwrap_or_default().to_owned(), lo, hi)
                }
                None => (String::new(), 0, 0),
            };
            Some(QueueItem {
                event_id: e.event_id.clone(),
                doc_id: e.doc_id.clone(),
                priority,
                signals,
                review_status: e.review_status.unwrap_or(ReviewStatus::Unreviewed),
                context,
                context_start,
                context_end,
                event: e.clone(),
            })
        })
        .collect();
    items.sort_by(|a, b| b.priority.total_cmp(&a.priority).then_with(|| a.event_id.cmp(&b.event_id)));
    items.truncate(limit);
    items
}

#[cfg(test)]
mod tests {
    use super::*;
    use provline_core::{EditType, PageId, Source};

    fn event(id: &str, edit_type: EditType, zone: &str, confidence: f64) -> SpanEditEvent {
        SpanEditEvent {
            schema_version: "1.0.0".into(),
            event_id: id.into(),
            doc_id: "d".into(),
            page_id: PageId::Number(1),
            base_revision: 0,
            span_start: 0,
            span_end: 2,
            orig_text: "ab".into(),
            new_text: "a b".into(),
            edit_type,
            source: Source::Model,
            confidence: Some(confidence),
            review_status: Some(ReviewStatus::Unreviewed),
            reviewer_id: None,
            layout_zone: Some(zone.into()),
            note: None,
            extra: Default::default(),
        }
    }

    fn docs() -> BTreeMap<String, BaseDocument> {
        [("d".to_owned(), BaseDocument::new("d", PageId::Number(1), "ab cd").unwrap())].into()
    }

    #[test]
    fn split_in_footnote_outranks_body_substitute() {
        let events = [
            event("a", EditType::Substitute, "body", 0.95),
            event("b", EditType::Split, "footnote", 0.95),
        ];
        let q = review_queue(&docs(), &events, &PriorityWeights::default(), 10);
        assert_eq!(q.iter().map(|i| i.event_id.as_str()).collect::<Vec<_>>(), ["b", "a"]);
        // (3.3 + 2.6 + 1.7) / 10.3 and 1.7 / 10.3
        assert!((q[0].priority - 7.6 / 10.3).abs() < 1e-12);
        assert!((q[1].priority - 1.7 / 10.3).abs() < 1e-12);
        assert_eq!(q[0].context, "ab cd");
    }

    #[test]
    fn limit_and_ties() {
        let events = [
            event("b", EditType::Substitute, "body", 0.95),
            event("a", EditType::Substitute, "body", 0.95),
        ];
        assert!(review_queue(&docs(), &events, &PriorityWeights::default(), 0).is_empty());
        let q = review_queue(&docs(), &events, &PriorityWeights::default(), 1);
        assert_eq!(q[0].event_id, "a");
    }

    #[test]
    fn approved_body_events_leave_the_queue() {
        let mut quiet = event("a", EditType::Substitute, "body", 0.95);
        quiet.review_status = Some(ReviewStatus::Approved);
        let mut split = event("b", EditType::Split, "body", 0.95);
        split.review_status = Some(ReviewStatus::Approved);
        let q = review_queue(&docs(), &[quiet, split], &PriorityWeights::default(), 10);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].signals, ["split_merge"]);
    }
}
