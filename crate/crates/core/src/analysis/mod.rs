//! Downstream comparison of entity mentions across variants.
//!
//! Mentions are produced by an external tagger and ingested as data. The
//! functions here count them, align them across variants through base
//! coordinates, classify entity-level volatility, attribute changes to
//! correction events, and aggregate the results.

mod align;
mod attribution;
mod category;
mod linking;
mod mention;
mod sample;
mod signal;
mod sweep;

pub use align::{
    align_mentions, classify_volatility, compare_entities, volatility_records, AlignedMention, Alignment,
    ComparedEntity, VolatilityKind, VolatilityRecord,
};
pub use attribution::{attribute, attribute_entities, Attribution, AttributionMethod, DEFAULT_WINDOW};
pub use category::{category_summary, CategoryDistribution, CategoryShare};
pub use linking::{link_stability, linking_coverage};
pub use mention::{jaccard, mention_stats, EntityMention, MentionStats};
pub use sample::{attribution_precision, sample_attribution_pairs, Judgment, WorksheetRow, CONTEXT_RADIUS};
pub use signal::{lift, signal_utility, Signal, SignalUtilityRow};
pub use sweep::{policy_sweep, DocRun, PolicyRun, SweepRow};
