use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::align::{VolatilityKind, VolatilityRecord};
use super::attribution::AttributionMethod;
use crate::model::{EditType, Source, SpanEditEvent};
use crate::replay::Variant;
use crate::text::CodepointIndex;
use crate::{Error, Result};

/// Context radius around a sampled mention, in codepoints.
pub const CONTEXT_RADIUS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    Yes,
    No,
}

/// One (entity, event) pair to be judged by an annotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorksheetRow {
    pub row_id: usize,
    pub record_id: String,
    pub kind: VolatilityKind,
    pub surface: String,
    pub label: String,
    pub context: String,
    pub event_id: String,
    pub edit_type: Option<EditType>,
    pub source: Option<Source>,
    pub confidence: Option<f64>,
    pub orig_text: Option<String>,
    pub new_text: Option<String>,
    pub method: AttributionMethod,
    pub distance: usize,
    pub judgment: Option<Judgment>,
}

fn context(text: &str, start: usize, end: usize) -> String {
    let index = CodepointIndex::new(text);
    let lo = start.saturating_sub(CONTEXT_RADIUS);
    let hi = (end + CONTEXT_RADIUS).min(index.len());
    index.slice(lo, hi.max(lo)).unwrap_or_default().into()
}

/// Draws `n` attributed (entity, event) pairs without replacement.
///
/// The draw is a pure function of the population and `seed` (ChaCha8).
/// Rows are returned in population order and numbered from 1. Context comes
/// from the variant-B mention when present, otherwise variant A; variants
/// are looked up by the mention's document.
pub fn sample_attribution_pairs(
    records: &[VolatilityRecord],
    variants_a: &BTreeMap<String, Variant>,
    variants_b: &BTreeMap<String, Variant>,
    events: &[SpanEditEvent],
    n: usize,
    seed: u64,
) -> Result<Vec<WorksheetRow>> {
    let population: Vec<(usize, usize)> = records
        .iter()
        .enumerate()
        .flat_map(|(r, rec)| (0..rec.attributed_events.len()).map(move |a| (r, a)))
        .collect();
    if n > population.len() {
        return Err(Error::SampleTooLarge {
            requested: n,
            population: population.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, population.len(), n).into_vec();
    picked.sort_unstable();

    let by_id: BTreeMap<&str, &SpanEditEvent> = events.iter().map(|e| (e.event_id.as_str(), e)).collect();
    let rows = picked
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let (r, a) = population[p];
            let record = &records[r];
            let attribution = &record.attributed_events[a];
            let (mention, variants) = match (&record.mention_b, &record.mention_a) {
                (Some(m), _) => (m, variants_b),
                (None, Some(m)) => (m, variants_a),
                (None, None) => unreachable!("volatility records carry at least one mention"),
            };
            let context = variants
                .get(&mention.doc_id)
                .map(|v| context(&v.text, mention.start, mention.end))
                .unwrap_or_default();
            let event = by_id.get(attribution.event_id.as_str());
            WorksheetRow {
                row_id: i + 1,
                record_id: record.record_id.clone(),
                kind: record.kind,
                surface: mention.surface.clone(),
                label: mention.label.clone(),
                context,
                event_id: attribution.event_id.clone(),
                edit_type: event.map(|e| e.edit_type),
                source: event.map(|e| e.source),
                confidence: event.and_then(|e| e.confidence),
                orig_text: event.map(|e| e.orig_text.clone()),
                new_text: event.map(|e| e.new_text.clone()),
                method: attribution.method,
                distance: attribution.distance,
                judgment: None,
            }
        })
        .collect();
    Ok(rows)
}

/// Share of judged pairs marked `yes`. Every row must be judged.
pub fn attribution_precision(rows: &[WorksheetRow]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::EmptyWorksheet);
    }
    let unjudged: Vec<usize> = rows.iter().filter(|r| r.judgment.is_none()).map(|r| r.row_id).collect();
    if !unjudged.is_empty() {
        return Err(Error::Unjudged { row_ids: unjudged });
    }
    let yes = rows.iter().filter(|r| r.judgment == Some(Judgment::Yes)).count();
    Ok(yes as f64 / rows.len() as f64)
}
