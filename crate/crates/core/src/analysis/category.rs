use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::align::VolatilityRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    pub category: String,
    pub count: usize,
    /// Percentage of labeled records, rounded half-up to one decimal.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub labeled: usize,
    pub categories: Vec<CategoryShare>,
    pub unlabeled: Vec<String>,
}

/// Percentage in tenths, rounded half-up, using integer arithmetic.
fn percent_tenths(count: usize, total: usize) -> usize {
    (count * 2000 + total) / (2 * total)
}

/// Distribution of externally supplied category labels over volatility
/// records, most frequent first (ties by name).
pub fn category_summary(records: &[VolatilityRecord], labels: &BTreeMap<String, String>) -> Result<CategoryDistribution> {
    let known: BTreeSet<&str> = records.iter().map(|r| r.record_id.as_str()).collect();
    if let Some(unknown) = labels.keys().find(|k| !known.contains(k.as_str())) {
        return Err(Error::UnknownRecord(unknown.clone()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut unlabeled = Vec::new();
    for record in records {
        match labels.get(&record.record_id) {
            Some(category) => *counts.entry(category.as_str()).or_insert(0) += 1,
            None => unlabeled.push(record.record_id.clone()),
        }
    }
    let labeled: usize = counts.values().sum();
    let mut categories: Vec<CategoryShare> = counts
        .into_iter()
        .map(|(category, count)| CategoryShare {
            category: category.into(),
            count,
            percent: percent_tenths(count, labeled) as f64 / 10.0,
        })
        .collect();
    categories.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.category.cmp(&b.category)));
    Ok(CategoryDistribution {
        labeled,
        categories,
        unlabeled,
    })
}
