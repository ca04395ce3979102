//! Overlap-first, window-fallback association of mentions with the applied
//! correction events likely to have produced them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::align::ComparedEntity;
use super::mention::EntityMention;
use crate::model::{Span, SpanEditEvent};
use crate::replay::Variant;

/// Window radius in codepoints of variant text.
pub const DEFAULT_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionMethod {
    Overlap,
    Window,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribution {
    pub event_id: String,
    pub method: AttributionMethod,
    pub distance: usize,
}

/// Codepoints between two spans; 0 when they overlap or touch.
fn gap(mention: Span, edit: Span) -> usize {
    edit.start.saturating_sub(mention.end).max(mention.start.saturating_sub(edit.end))
}

struct Candidate<'a> {
    event_id: &'a str,
    event: Option<&'a SpanEditEvent>,
    distance: usize,
}

fn tie_break(a: &Candidate<'_>, b: &Candidate<'_>) -> Ordering {
    let boundary = |c: &Candidate<'_>| c.event.is_some_and(|e| e.edit_type.affects_boundaries());
    let confidence = |c: &Candidate<'_>| c.event.and_then(|e| e.confidence);
    a.distance
        .cmp(&b.distance)
        .then_with(|| boundary(b).cmp(&boundary(a)))
        .then_with(|| match (confidence(a), confidence(b)) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        })
        .then_with(|| a.event_id.cmp(b.event_id))
}

/// Attributes one mention to the events applied in its variant.
///
/// Every applied event whose variant-space replacement overlaps or touches
/// the mention is returned with distance 0. Only when there is none, the
/// single closest event within `window` codepoints is returned; ties prefer
/// split/merge edits, then higher confidence, then the smaller event id.
pub fn attribute(mention: &EntityMention, variant: &Variant, events: &[SpanEditEvent], window: usize) -> Vec<Attribution> {
    let by_id: BTreeMap<&str, &SpanEditEvent> = events.iter().map(|e| (e.event_id.as_str(), e)).collect();
    let span = mention.span();
    let mut candidates: Vec<Candidate<'_>> = variant
        .offset_map
        .edits()
        .filter_map(|seg| {
            let id = seg.event_id.as_deref()?;
            Some(Candidate {
                event_id: id,
                event: by_id.get(id).copied(),
                distance: gap(span, seg.variant),
            })
        })
        .filter(|c| c.distance <= window)
        .collect();
    candidates.sort_by(tie_break);

    if candidates.first().is_some_and(|c| c.distance == 0) {
        candidates
            .iter()
            .take_while(|c| c.distance == 0)
            .map(|c| Attribution {
                event_id: c.event_id.into(),
                method: AttributionMethod::Overlap,
                distance: 0,
            })
            .collect()
    } else {
        candidates
            .first()
            .map(|c| Attribution {
                event_id: c.event_id.into(),
                method: AttributionMethod::Window,
                distance: c.distance,
            })
            .into_iter()
            .collect()
    }
}

/// Fills `attributions` of each entity from both sides of the comparison.
/// An event reached from both sides keeps its best attribution.
pub fn attribute_entities(
    entities: &mut [ComparedEntity],
    variant_a: &Variant,
    variant_b: &Variant,
    events: &[SpanEditEvent],
    window: usize,
) {
    for entity in entities.iter_mut() {
        let mut best: BTreeMap<String, Attribution> = BTreeMap::new();
        let sides = [(entity.mention_a.as_ref(), variant_a), (entity.mention_b.as_ref(), variant_b)];
        for (mention, variant) in sides {
            let Some(mention) = mention else { continue };
            for attr in attribute(mention, variant, events, window) {
                match best.get(&attr.event_id) {
                    Some(prev) if (prev.method, prev.distance) <= (attr.method, attr.distance) => {}
                    _ => {
                        best.insert(attr.event_id.clone(), attr);
                    }
                }
            }
        }
        let mut attributions: Vec<Attribution> = best.into_values().collect();
        attributions.sort_by(|x, y| (x.method, x.distance, &x.event_id).cmp(&(y.method, y.distance, &y.event_id)));
        entity.attributions = attributions;
    }
}
