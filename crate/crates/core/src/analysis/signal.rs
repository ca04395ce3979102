use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::align::ComparedEntity;
use crate::model::{ReviewStatus, SpanEditEvent};

/// A provenance predicate over one event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "signal", rename_all = "snake_case")]
pub enum Signal {
    /// `confidence < threshold`; events without a confidence count as low.
    LowConfidence { threshold: f64 },
    /// `review_status != approved`.
    Unreviewed,
    /// `edit_type ∈ {split, merge}`.
    SplitMerge,
    /// A layout zone is recorded and it is not `body`.
    NonBodyZone,
}

impl Signal {
    pub fn builtins() -> Vec<Signal> {
        alloc::vec![
            Signal::LowConfidence { threshold: 0.70 },
            Signal::Unreviewed,
            Signal::SplitMerge,
            Signal::NonBodyZone,
        ]
    }

    pub fn name(&self) -> String {
        match self {
            Signal::LowConfidence { threshold } => format!("low_confidence<{threshold}"),
            Signal::Unreviewed => "unreviewed".into(),
            Signal::SplitMerge => "split_merge".into(),
            Signal::NonBodyZone => "non_body_zone".into(),
        }
    }

    pub fn flags(&self, event: &SpanEditEvent) -> bool {
        match self {
            Signal::LowConfidence { threshold } => event.confidence.is_none_or(|c| c < *threshold),
            Signal::Unreviewed => event.review_status != Some(ReviewStatus::Approved),
            Signal::SplitMerge => event.edit_type.affects_boundaries(),
            Signal::NonBodyZone => event.layout_zone.as_deref().is_some_and(|z| z != "body"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalUtilityRow {
    pub signal: String,
    pub flagged_events: usize,
    pub total_events: usize,
    /// Fraction of correction events flagged; `None` without events.
    pub prevalence: Option<f64>,
    pub flagged_entities: usize,
    pub flagged_volatile: usize,
    pub unflagged_entities: usize,
    pub unflagged_volatile: usize,
    pub flagged_volatility_rate: Option<f64>,
    pub unflagged_volatility_rate: Option<f64>,
    /// Undefined (`None`) when the unflagged rate is zero or either rate is undefined.
    pub lift: Option<f64>,
}

/// Ratio of two volatility rates; undefined when the denominator is zero.
pub fn lift(flagged_rate: f64, unflagged_rate: f64) -> Option<f64> {
    (unflagged_rate > 0.0).then(|| flagged_rate / unflagged_rate)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Flagged-vs-unflagged volatility rates per signal. An entity is flagged
/// when any of its attributed events satisfies the signal.
pub fn signal_utility(entities: &[ComparedEntity], all_events: &[SpanEditEvent], signals: &[Signal]) -> Vec<SignalUtilityRow> {
    let by_id: BTreeMap<&str, &SpanEditEvent> = all_events.iter().map(|e| (e.event_id.as_str(), e)).collect();
    signals
        .iter()
        .map(|signal| {
            let flagged_events = all_events.iter().filter(|e| signal.flags(e)).count();
            let (mut fe, mut fv, mut ue, mut uv) = (0, 0, 0, 0);
            for entity in entities {
                let flagged = entity
                    .attributions
                    .iter()
                    .filter_map(|a| by_id.get(a.event_id.as_str()))
                    .any(|e| signal.flags(e));
                let volatile = usize::from(entity.is_volatile());
                if flagged {
                    fe += 1;
                    fv += volatile;
                } else {
                    ue += 1;
                    uv += volatile;
                }
            }
            // Computed from counts so that the ratio is exact when it is integral.
            let lift = (fe > 0 && uv > 0).then(|| (fv * ue) as f64 / (fe * uv) as f64);
            SignalUtilityRow {
                signal: signal.name(),
                flagged_events,
                total_events: all_events.len(),
                prevalence: ratio(flagged_events, all_events.len()),
                flagged_entities: fe,
                flagged_volatile: fv,
                unflagged_entities: ue,
                unflagged_volatile: uv,
                flagged_volatility_rate: ratio(fv, fe),
                unflagged_volatility_rate: ratio(uv, ue),
                lift,
            }
        })
        .collect()
}
