use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::attribution::Attribution;
use super::mention::EntityMention;
use crate::model::Span;
use crate::offset::Direction;
use crate::replay::Variant;
use crate::text::CodepointIndex;
use crate::{Error, Result};

/// A mention together with its projection into base coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedMention {
    pub mention: EntityMention,
    pub base: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub doc_id: String,
    pub variant_a: String,
    pub variant_b: String,
    pub matched: Vec<(AlignedMention, AlignedMention)>,
    pub unmatched_a: Vec<AlignedMention>,
    pub unmatched_b: Vec<AlignedMention>,
}

fn project(mentions: &[EntityMention], variant: &Variant) -> Result<Vec<AlignedMention>> {
    let index = CodepointIndex::new(&variant.text);
    let mut out = Vec::with_capacity(mentions.len());
    for m in mentions {
        if m.doc_id != variant.doc_id || m.variant_id != variant.variant_id {
            return Err(Error::LineageMismatch(format!(
                "mention {:?} belongs to {}/{} but was compared against {}/{}",
                m.surface, m.doc_id, m.variant_id, variant.doc_id, variant.variant_id
            )));
        }
        if m.start >= m.end || index.slice(m.start, m.end) != Some(m.surface.as_str()) {
            return Err(Error::MentionMismatch {
                variant_id: variant.variant_id.clone(),
                start: m.start,
                end: m.end,
                surface: m.surface.clone(),
            });
        }
        let base = variant.offset_map.map_span(m.span(), Direction::VariantToBase)?;
        out.push(AlignedMention { mention: m.clone(), base });
    }
    out.sort_by_key(|x| (x.base, x.mention.start));
    Ok(out)
}

/// Length of the intersection, `None` when the spans do not meet. A
/// zero-width projection meets a span strictly containing it or an equal
/// zero-width span.
fn intersection(a: Span, b: Span) -> Option<usize> {
    match (a.is_empty(), b.is_empty()) {
        (false, false) => {
            let lo = a.start.max(b.start);
            let hi = a.end.min(b.end);
            (lo < hi).then(|| hi - lo)
        }
        (true, true) => (a.start == b.start).then_some(0),
        _ => a.overlaps(&b).then_some(0),
    }
}

/// Matches mentions of two variants of the same base document.
///
/// Mentions are projected to base coordinates and paired greedily by
/// largest base intersection; ties go to the pair with the smaller base
/// start. Each mention is matched at most once.
pub fn align_mentions(
    mentions_a: &[EntityMention],
    mentions_b: &[EntityMention],
    variant_a: &Variant,
    variant_b: &Variant,
) -> Result<Alignment> {
    if variant_a.doc_id != variant_b.doc_id || variant_a.trace.base_digest != variant_b.trace.base_digest {
        return Err(Error::LineageMismatch(format!(
            "variants {} and {} do not derive from the same base document",
            variant_a.variant_id, variant_b.variant_id
        )));
    }
    let a = project(mentions_a, variant_a)?;
    let b = project(mentions_b, variant_b)?;

    let mut candidates = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if let Some(size) = intersection(x.base, y.base) {
                candidates.push((size, x.base.start.min(y.base.start), i, j));
            }
        }
    }
    candidates.sort_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)).then(p.3.cmp(&q.3)));

    let mut used_a = alloc::vec![false; a.len()];
    let mut used_b = alloc::vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, _, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();

    let matched = pairs.iter().map(|&(i, j)| (a[i].clone(), b[j].clone())).collect();
    let unmatched_a = a.iter().zip(&used_a).filter(|(_, u)| !**u).map(|(m, _)| m.clone()).collect();
    let unmatched_b = b.iter().zip(&used_b).filter(|(_, u)| !**u).map(|(m, _)| m.clone()).collect();
    Ok(Alignment {
        doc_id: variant_a.doc_id.clone(),
        variant_a: variant_a.variant_id.clone(),
        variant_b: variant_b.variant_id.clone(),
        matched,
        unmatched_a,
        unmatched_b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolatilityKind {
    Added,
    Removed,
    SurfaceChanged,
    BoundaryChanged,
}

impl VolatilityKind {
    pub const ALL: [VolatilityKind; 4] = [
        VolatilityKind::Added,
        VolatilityKind::Removed,
        VolatilityKind::SurfaceChanged,
        VolatilityKind::BoundaryChanged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VolatilityKind::Added => "added",
            VolatilityKind::Removed => "removed",
            VolatilityKind::SurfaceChanged => "surface_changed",
            VolatilityKind::BoundaryChanged => "boundary_changed",
        }
    }
}

/// One entity of a two-variant comparison, stable or volatile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparedEntity {
    pub volatility: Option<VolatilityKind>,
    pub mention_a: Option<EntityMention>,
    pub mention_b: Option<EntityMention>,
    pub base_anchor: Span,
    #[serde(default)]
    pub attributions: Vec<Attribution>,
}

impl ComparedEntity {
    pub fn is_volatile(&self) -> bool {
        self.volatility.is_some()
    }

    pub fn doc_id(&self) -> &str {
        self.mention_a
            .as_ref()
            .or(self.mention_b.as_ref())
            .map(|m| m.doc_id.as_str())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilityRecord {
    pub record_id: String,
    pub kind: VolatilityKind,
    pub mention_a: Option<EntityMention>,
    pub mention_b: Option<EntityMention>,
    pub base_anchor: Span,
    pub attributed_events: Vec<Attribution>,
}

/// Every entity of an alignment, ordered by base anchor. Boundary changes
/// take precedence over surface changes.
pub fn compare_entities(alignment: &Alignment) -> Vec<ComparedEntity> {
    let mut out = Vec::with_capacity(alignment.matched.len() + alignment.unmatched_a.len() + alignment.unmatched_b.len());
    for (a, b) in &alignment.matched {
        let volatility = if a.base != b.base {
            Some(VolatilityKind::BoundaryChanged)
        } else if a.mention.surface != b.mention.surface {
            Some(VolatilityKind::SurfaceChanged)
        } else {
            None
        };
        out.push(ComparedEntity {
            volatility,
            mention_a: Some(a.mention.clone()),
            mention_b: Some(b.mention.clone()),
            base_anchor: a.base.hull(&b.base),
            attributions: Vec::new(),
        });
    }
    for a in &alignment.unmatched_a {
        out.push(ComparedEntity {
            volatility: Some(VolatilityKind::Removed),
            mention_a: Some(a.mention.clone()),
            mention_b: None,
            base_anchor: a.base,
            attributions: Vec::new(),
        });
    }
    for b in &alignment.unmatched_b {
        out.push(ComparedEntity {
            volatility: Some(VolatilityKind::Added),
            mention_a: None,
            mention_b: Some(b.mention.clone()),
            base_anchor: b.base,
            attributions: Vec::new(),
        });
    }
    let key = |e: &ComparedEntity| {
        (
            e.base_anchor,
            e.mention_a.as_ref().map(|m| m.start),
            e.mention_b.as_ref().map(|m| m.start),
        )
    };
    out.sort_by_key(key);
    out
}

/// Volatile entities as records with ids `"{doc_id}#{n}"`, numbered from 1
/// in base order per document.
pub fn volatility_records(entities: &[ComparedEntity]) -> Vec<VolatilityRecord> {
    let mut counters: alloc::collections::BTreeMap<&str, usize> = alloc::collections::BTreeMap::new();
    entities
        .iter()
        .filter_map(|e| {
            let kind = e.volatility?;
            let n = counters.entry(e.doc_id()).or_insert(0);
            *n += 1;
            Some(VolatilityRecord {
                record_id: format!("{}#{}", e.doc_id(), n),
                kind,
                mention_a: e.mention_a.clone(),
                mention_b: e.mention_b.clone(),
                base_anchor: e.base_anchor,
                attributed_events: e.attributions.clone(),
            })
        })
        .collect()
}

pub fn classify_volatility(alignment: &Alignment) -> Vec<VolatilityRecord> {
    volatility_records(&compare_entities(alignment))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::fixtures::{doc, event};
    use crate::model::{EditType, SpanEditEvent};
    use crate::policy::TrustPolicy;
    use crate::replay::{reconstruct, ConflictMode};
    use alloc::vec;

    pub fn fixture_events() -> Vec<SpanEditEvent> {
        vec![
            event("a", 0, 7, "Madifon", "Madison", EditType::Substitute),
            event("b", 16, 23, "NewYork", "New York", EditType::Split),
        ]
    }

    pub fn variants() -> (Variant, Variant) {
        let d = doc("Madifon went to NewYork.");
        let events = fixture_events();
        let raw = reconstruct(&d, &events, &TrustPolicy::raw(), ConflictMode::Error).unwrap();
        let all = reconstruct(&d, &events, &TrustPolicy::all("all"), ConflictMode::Error).unwrap();
        (raw, all)
    }

    pub fn mention(v: &Variant, start: usize, end: usize, label: &str) -> EntityMention {
        EntityMention {
            doc_id: v.doc_id.clone(),
            variant_id: v.variant_id.clone(),
            start,
            end,
            surface: v.text.chars().skip(start).take(end - start).collect(),
            label: label.into(),
            kb_id: None,
        }
    }

    #[test]
    fn identical_variants_fully_matched() {
        let (_, all) = variants();
        let ms = vec![mention(&all, 0, 7, "PER"), mention(&all, 16, 24, "LOC")];
        let al = align_mentions(&ms, &ms, &all, &all).unwrap();
        assert_eq!(al.matched.len(), 2);
        assert!(al.unmatched_a.is_empty() && al.unmatched_b.is_empty());
        assert!(classify_volatility(&al).is_empty());
    }

    #[test]
    fn corrected_surface_matches_raw() {
        let (raw, all) = variants();
        let a = vec![mention(&raw, 0, 7, "PER")];
        let b = vec![mention(&all, 0, 7, "PER"), mention(&all, 16, 24, "LOC")];
        let al = align_mentions(&a, &b, &raw, &all).unwrap();
        assert_eq!(al.matched.len(), 1);
        assert_eq!(al.matched[0].0.mention.surface, "Madifon");
        assert_eq!(al.matched[0].1.mention.surface, "Madison");
        assert_eq!(al.unmatched_b.len(), 1);
        assert_eq!(al.unmatched_b[0].mention.surface, "New York");

        let records = classify_volatility(&al);
        let kinds: Vec<_> = records.iter().map(|r| r.kind).collect();
        assert_eq!(kinds, vec![VolatilityKind::SurfaceChanged, VolatilityKind::Added]);
        assert_eq!(records[0].record_id, "doc#1");
        assert_eq!(records[1].base_anchor, Span::new(16, 23));
    }

    #[test]
    fn boundary_change_outranks_surface_change() {
        let (raw, all) = variants();
        // raw "New" projects to base [16,19), corrected "New York" to [16,23).
        let a = vec![mention(&raw, 16, 19, "LOC")];
        let b = vec![mention(&all, 16, 24, "LOC")];
        let records = classify_volatility(&align_mentions(&a, &b, &raw, &all).unwrap());
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].kind, VolatilityKind::BoundaryChanged);
        assert_eq!(records[0].base_anchor, Span::new(16, 23));
    }

    #[test]
    fn greedy_prefers_largest_intersection() {
        let (raw, all) = variants();
        // raw: "New" [16,19), "York" [19,23); corrected "New York" [16,24) -> base [16,23)
        let a = vec![mention(&raw, 16, 19, "LOC"), mention(&raw, 19, 23, "LOC")];
        let b = vec![mention(&all, 16, 24, "LOC")];
        let al = align_mentions(&a, &b, &raw, &all).unwrap();
        assert_eq!(al.matched.len(), 1);
        assert_eq!(al.matched[0].0.mention.surface, "York");
        assert_eq!(al.unmatched_a[0].mention.surface, "New");
    }

    #[test]
    fn lineage_checked() {
        let (raw, all) = variants();
        let stale = vec![mention(&raw, 0, 7, "PER")];
        assert!(matches!(
            align_mentions(&stale, &[], &all, &raw),
            Err(Error::LineageMismatch(_))
        ));
        let other = {
            let d = crate::model::BaseDocument::new("other", crate::model::PageId::Number(1), "Madifon").unwrap();
            reconstruct(&d, &[], &TrustPolicy::raw(), ConflictMode::Error).unwrap()
        };
        assert!(matches!(align_mentions(&[], &[], &raw, &other), Err(Error::LineageMismatch(_))));
        let mut wrong = mention(&all, 0, 7, "PER");
        wrong.surface = "Madifon".into();
        assert!(matches!(
            align_mentions(&[], &[wrong], &raw, &all),
            Err(Error::MentionMismatch { .. })
        ));
    }
}
