use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::align::{align_mentions, classify_volatility};
use super::mention::{jaccard, EntityMention};
use crate::replay::Variant;
use crate::{Error, Result};

/// One document's variant under a policy with the mentions tagged on it.
#[derive(Debug, Clone, PartialEq)]
pub struct DocRun {
    pub variant: Variant,
    pub mentions: Vec<EntityMention>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub policy: String,
    pub docs: BTreeMap<String, DocRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub policy: String,
    pub mentions: usize,
    pub unique: usize,
    pub jaccard_vs_raw: f64,
    /// Volatile entities against the baseline; `None` on the baseline row.
    pub volatile: Option<usize>,
}

fn surfaces(run: &PolicyRun) -> BTreeSet<String> {
    run.docs
        .values()
        .flat_map(|d| d.mentions.iter().map(|m| m.surface.clone()))
        .collect()
}

/// One row per policy, in input order. Unique entities are distinct surface
/// strings pooled over the corpus; volatility is summed over documents.
pub fn policy_sweep(baseline: &str, runs: &[PolicyRun]) -> Result<Vec<SweepRow>> {
    let base = runs
        .iter()
        .find(|r| r.policy == baseline)
        .ok_or_else(|| Error::UnknownBaseline(baseline.into()))?;
    let base_unique = surfaces(base);

    runs.iter()
        .map(|run| {
            for doc_id in base.docs.keys().chain(run.docs.keys()) {
                for r in [base, run] {
                    if !r.docs.contains_key(doc_id) {
                        return Err(Error::MissingRun {
                            policy: r.policy.clone(),
                            doc_id: doc_id.clone(),
                        });
                    }
                }
            }
            let unique = surfaces(run);
            let volatile = if run.policy == baseline {
                None
            } else {
                let mut total = 0;
                for (doc_id, doc) in &run.docs {
                    let reference = &base.docs[doc_id];
                    let alignment = align_mentions(&reference.mentions, &doc.mentions, &reference.variant, &doc.variant)?;
                    total += classify_volatility(&alignment).len();
                }
                Some(total)
            };
            Ok(SweepRow {
                policy: run.policy.clone(),
                mentions: run.docs.values().map(|d| d.mentions.len()).sum(),
                unique: unique.len(),
                jaccard_vs_raw: jaccard(&base_unique, &unique),
                volatile,
            })
        })
        .collect()
}
