//! Corpus-level pipelines shared by the command line and the review service.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use provline_core::analysis::{
    align_mentions, attribute_entities, compare_entities, jaccard, mention_stats, signal_utility, volatility_records,
    ComparedEntity, EntityMention, Signal, SignalUtilityRow, VolatilityKind, VolatilityRecord, DEFAULT_WINDOW,
};
use provline_core::{reconstruct, ApplicationTrace, BaseDocument, ConflictMode, OffsetMap, SpanEditEvent, TrustPolicy, Variant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{read_mentions_jsonl, Corpus, IoError};

/// Accepts a preset name, `conf>=X` shorthand, or an inline JSON policy.
pub fn parse_policy(text: &str) -> Option<TrustPolicy> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).ok();
    }
    TrustPolicy::preset(text).or_else(|| TrustPolicy::parse_shorthand(text))
}

/// Reconstructs every document in parallel. Map keys are document ids.
pub fn reconstruct_all(
    documents: &BTreeMap<String, BaseDocument>,
    events: &BTreeMap<String, Vec<SpanEditEvent>>,
    policy: &TrustPolicy,
    mode: ConflictMode,
) -> Result<BTreeMap<String, Variant>, DocError> {
    let empty = Vec::new();
    documents
        .par_iter()
        .map(|(id, doc)| {
            let evs = events.get(id).unwrap_or(&empty);
            reconstruct(doc, evs, policy, mode)
                .map(|v| (id.clone(), v))
                .map_err(|source| DocError { doc_id: id.clone(), source })
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
#[error("{doc_id}: {source}")]
pub struct DocError {
    pub doc_id: String,
    #[source]
    pub source: provline_core::Error,
}

/// The trace file written next to each reconstructed text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub variant_id: String,
    pub doc_id: String,
    pub trace: ApplicationTrace,
    pub offset_map: OffsetMap,
}

impl From<&Variant> for TraceFile {
    fn from(v: &Variant) -> Self {
        TraceFile {
            variant_id: v.variant_id.clone(),
            doc_id: v.doc_id.clone(),
            trace: v.trace.clone(),
            offset_map: v.offset_map.clone(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MentionError {
    #[error("no mentions for policy {policy}: {} not found", path.display())]
    Missing { policy: String, path: PathBuf },
    #[error("stale mentions for policy {policy} in {doc_id}: tagged variant {found}, current variant {expected}")]
    Stale {
        policy: String,
        doc_id: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Loads tagger output for every variant and checks that each mention was
/// tagged on the variant that exists now. `path` is either a directory with
/// one `<doc_id>.jsonl` per document (the corpus layout) or a single JSONL
/// file holding mentions of any documents.
pub fn load_mentions(
    path: &Path,
    policy: &str,
    variants: &BTreeMap<String, Variant>,
) -> Result<BTreeMap<String, Vec<EntityMention>>, MentionError> {
    let missing = |path: PathBuf| MentionError::Missing {
        policy: policy.into(),
        path,
    };
    let files: Vec<PathBuf> = if path.is_file() {
        vec![path.to_path_buf()]
    } else if path.is_dir() {
        let files: Vec<PathBuf> = variants.keys().map(|d| path.join(format!("{d}.jsonl"))).collect();
        if let Some(absent) = files.iter().find(|f| !f.is_file()) {
            return Err(missing(absent.clone()));
        }
        files
    } else {
        return Err(missing(path.to_path_buf()));
    };

    let mut out: BTreeMap<String, Vec<EntityMention>> = variants.keys().map(|k| (k.clone(), Vec::new())).collect();
    for file in &files {
        for m in read_mentions_jsonl(file)? {
            let Some(v) = variants.get(&m.doc_id) else {
                return Err(IoError::Invalid {
                    line: 0,
                    message: format!("{}: mention for unknown document {}", file.display(), m.doc_id),
                }
                .into());
            };
            if m.variant_id != v.variant_id {
                return Err(MentionError::Stale {
                    policy: policy.into(),
                    doc_id: m.doc_id.clone(),
                    expected: v.variant_id.clone(),
                    found: m.variant_id.clone(),
                });
            }
            out.get_mut(&m.doc_id).expect("keys cover every variant").push(m);
        }
    }
    Ok(out)
}

/// Mentions, variants and effective events for one side of a comparison.
pub struct Side<'a> {
    pub policy: &'a str,
    pub variants: &'a BTreeMap<String, Variant>,
    pub mentions: &'a BTreeMap<String, Vec<EntityMention>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub policy_a: String,
    pub policy_b: String,
    pub mentions_a: usize,
    pub mentions_b: usize,
    pub unique_a: usize,
    pub unique_b: usize,
    pub jaccard: f64,
    pub entities: usize,
    pub volatile: usize,
    pub by_kind: BTreeMap<String, usize>,
    /// Volatile entities with at least one attributed event not approved.
    pub linked_to_unreviewed: usize,
    /// `linked_to_unreviewed / volatile`; `None` without volatile entities.
    pub share_linked_to_unreviewed: Option<f64>,
    pub signals: Vec<SignalUtilityRow>,
    pub records: Vec<VolatilityRecord>,
}

fn unique(mentions: &BTreeMap<String, Vec<EntityMention>>) -> BTreeSet<String> {
    mention_stats(mentions.values().flatten()).unique
}

/// Aligns, classifies and attributes every document of the corpus.
pub fn diff(a: &Side<'_>, b: &Side<'_>, events: &BTreeMap<String, Vec<SpanEditEvent>>) -> provline_core::Result<DiffReport> {
    let empty = Vec::new();
    let no_mentions = Vec::new();
    let per_doc: Vec<(Vec<ComparedEntity>, Vec<VolatilityRecord>)> = a
        .variants
        .par_iter()
        .map(|(doc_id, va)| {
            let vb = &b.variants[doc_id];
            let evs = events.get(doc_id).unwrap_or(&empty);
            let ma = a.mentions.get(doc_id).unwrap_or(&no_mentions);
            let mb = b.mentions.get(doc_id).unwrap_or(&no_mentions);
            let alignment = align_mentions(ma, mb, va, vb)?;
            let mut entities = compare_entities(&alignment);
            attribute_entities(&mut entities, va, vb, evs, DEFAULT_WINDOW);
            let records = volatility_records(&entities);
            Ok((entities, records))
        })
        .collect::<provline_core::Result<_>>()?;

    let all_events: Vec<SpanEditEvent> = a.variants.keys().flat_map(|d| events.get(d).unwrap_or(&empty).iter().cloned()).collect();
    let entities: Vec<ComparedEntity> = per_doc.iter().flat_map(|(e, _)| e.iter().cloned()).collect();
    let records: Vec<VolatilityRecord> = per_doc.into_iter().flat_map(|(_, r)| r).collect();

    let by_id: BTreeMap<&str, &SpanEditEvent> = all_events.iter().map(|e| (e.event_id.as_str(), e)).collect();
    let linked_to_unreviewed = records
        .iter()
        .filter(|r| {
            r.attributed_events
                .iter()
                .filter_map(|at| by_id.get(at.event_id.as_str()))
                .any(|e| Signal::Unreviewed.flags(e))
        })
        .count();
    let mut by_kind: BTreeMap<String, usize> = VolatilityKind::ALL.iter().map(|k| (k.as_str().to_owned(), 0)).collect();
    for r in &records {
        *by_kind.entry(r.kind.as_str().to_owned()).or_default() += 1;
    }
    let (ua, ub) = (unique(a.mentions), unique(b.mentions));
    Ok(DiffReport {
        policy_a: a.policy.into(),
        policy_b: b.policy.into(),
        mentions_a: a.mentions.values().map(Vec::len).sum(),
        mentions_b: b.mentions.values().map(Vec::len).sum(),
        unique_a: ua.len(),
        unique_b: ub.len(),
        jaccard: jaccard(&ua, &ub),
        entities: entities.len(),
        volatile: records.len(),
        by_kind,
        linked_to_unreviewed,
        share_linked_to_unreviewed: (!records.is_empty()).then(|| linked_to_unreviewed as f64 / records.len() as f64),
        signals: signal_utility(&entities, &all_events, &Signal::builtins()),
        records,
    })
}

/// Everything needed to compare a corpus under two policies.
pub struct Comparison {
    pub events: BTreeMap<String, Vec<SpanEditEvent>>,
    pub variants_a: BTreeMap<String, Variant>,
    pub variants_b: BTreeMap<String, Variant>,
}

impl Comparison {
    pub fn build(corpus: &Corpus, events: &[SpanEditEvent], a: &TrustPolicy, b: &TrustPolicy, mode: ConflictMode) -> Result<Self, DocError> {
        let events = corpus.by_document(events);
        Ok(Comparison {
            variants_a: reconstruct_all(&corpus.documents, &events, a, mode)?,
            variants_b: reconstruct_all(&corpus.documents, &events, b, mode)?,
            events,
        })
    }
}

/// Sweep bookkeeping written by the emit phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub baseline: String,
    pub conflict_mode: ConflictMode,
    pub policies: Vec<SweepPolicy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPolicy {
    pub policy: TrustPolicy,
    /// Variant id per document.
    pub variants: BTreeMap<String, String>,
}

/// One operating point of the coverage/stability tradeoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub policy: String,
    pub coverage: usize,
    pub volatile: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub baseline: String,
    pub rows: Vec<provline_core::analysis::SweepRow>,
    pub curve: Vec<CurvePoint>,
}

impl SweepReport {
    pub fn new(baseline: &str, rows: Vec<provline_core::analysis::SweepRow>) -> Self {
        let curve = rows
            .iter()
            .map(|r| CurvePoint {
                policy: r.policy.clone(),
                coverage: r.unique,
                volatile: r.volatile.unwrap_or(0),
            })
            .collect();
        SweepReport {
            baseline: baseline.into(),
            rows,
            curve,
        }
    }
}
