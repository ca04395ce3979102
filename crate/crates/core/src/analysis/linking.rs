use super::align::AlignedMention;
use super::mention::EntityMention;

/// Fraction of mentions carrying a KB identifier; 0.0 for no mentions.
pub fn linking_coverage(mentions: &[EntityMention]) -> f64 {
    if mentions.is_empty() {
        return 0.0;
    }
    let linked = mentions.iter().filter(|m| m.kb_id.is_some()).count();
    linked as f64 / mentions.len() as f64
}

/// Among matched pairs linked on both sides, the fraction resolving to the
/// same identifier. Undefined when no pair is linked on both sides.
pub fn link_stability(matched: &[(AlignedMention, AlignedMention)]) -> Option<f64> {
    let mut linked = 0usize;
    let mut same = 0usize;
    for (a, b) in matched {
        if let (Some(x), Some(y)) = (&a.mention.kb_id, &b.mention.kb_id) {
            linked += 1;
            same += usize::from(x == y);
        }
    }
    (linked > 0).then(|| same as f64 / linked as f64)
}
