use alloc::collections::BTreeSet;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::model::Span;

/// An entity span in one variant's coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub doc_id: String,
    pub variant_id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb_id: Option<String>,
}

impl EntityMention {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MentionStats {
    pub mention_count: usize,
    /// Distinct surface strings, compared by exact codepoints.
    pub unique: BTreeSet<String>,
}

pub fn mention_stats<'a>(mentions: impl IntoIterator<Item = &'a EntityMention>) -> MentionStats {
    let mut stats = MentionStats::default();
    for m in mentions {
        stats.mention_count += 1;
        if !stats.unique.contains(&m.surface) {
            stats.unique.insert(m.surface.clone());
        }
    }
    stats
}

/// `|A ∩ B| / |A ∪ B|`, with two empty sets counting as identical.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}
