//! Trust policies: declarative predicates over event metadata.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{ReviewStatus, Source, SpanEditEvent};

fn default_true() -> bool {
    true
}

/// Which events to replay.
///
/// With every optional field absent and `require_approved = false` this is
/// the "all corrections" policy. Rejected events are vetoed unless
/// `exclude_rejected` is explicitly turned off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustPolicy {
    pub name: String,
    #[serde(default)]
    pub min_confidence: Option<f64>,
    #[serde(default)]
    pub require_approved: bool,
    #[serde(default)]
    pub allowed_sources: Option<Vec<Source>>,
    #[serde(default = "default_true")]
    pub exclude_rejected: bool,
}

/// Result of evaluating a policy on one event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Selected,
    SkippedPolicy,
    ExcludedRejected,
}

impl TrustPolicy {
    pub const PRESETS: [&'static str; 6] = ["raw", "all", "conf50", "conf70", "conf85", "approved"];

    pub fn all(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            min_confidence: None,
            require_approved: false,
            allowed_sources: None,
            exclude_rejected: true,
        }
    }

    /// Selects nothing: the raw OCR text.
    pub fn raw() -> Self {
        Self {
            allowed_sources: Some(Vec::new()),
            ..Self::all("raw")
        }
    }

    pub fn min_confidence(name: impl Into<String>, threshold: f64) -> Self {
        Self {
            min_confidence: Some(threshold),
            ..Self::all(name)
        }
    }

    pub fn approved_only() -> Self {
        Self {
            require_approved: true,
            ..Self::all("approved")
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "raw" => Self::raw(),
            "all" => Self::all("all"),
            "conf50" => Self::min_confidence("conf50", 0.50),
            "conf70" => Self::min_confidence("conf70", 0.70),
            "conf85" => Self::min_confidence("conf85", 0.85),
            "approved" => Self::approved_only(),
            _ => return None,
        })
    }

    /// Every preset, ordered from least to most strict after `raw`.
    pub fn presets() -> Vec<Self> {
        Self::PRESETS.iter().filter_map(|n| Self::preset(n)).collect()
    }

    /// Parses `conf>=0.70` style shorthand.
    pub fn parse_shorthand(text: &str) -> Option<Self> {
        let threshold = text.trim().strip_prefix("conf>=")?.trim();
        let value: f64 = threshold.parse().ok()?;
        if !(0.0..=1.0).contains(&value) {
            return None;
        }
        Some(Self::min_confidence(text.trim().to_string(), value))
    }

    pub fn evaluate(&self, event: &SpanEditEvent) -> Selection {
        if self.exclude_rejected && event.review_status == Some(ReviewStatus::Rejected) {
            return Selection::ExcludedRejected;
        }
        if let Some(threshold) = self.min_confidence {
            match event.confidence {
                Some(c) if c >= threshold => {}
                _ => return Selection::SkippedPolicy,
            }
        }
        if self.require_approved && event.review_status != Some(ReviewStatus::Approved) {
            return Selection::SkippedPolicy;
        }
        if let Some(sources) = &self.allowed_sources {
            if !sources.contains(&event.source) {
                return Selection::SkippedPolicy;
            }
        }
        Selection::Selected
    }

    pub fn accepts(&self, event: &SpanEditEvent) -> bool {
        self.evaluate(event) == Selection::Selected
    }

    /// Compact JSON over the normalized policy (sources sorted, deduplicated).
    /// Field order is fixed, absent options serialize as `null`.
    pub fn descriptor(&self) -> String {
        let mut normalized = self.clone();
        if let Some(sources) = normalized.allowed_sources.as_mut() {
            sources.sort();
            sources.dedup();
        }
        serde_json::to_string(&normalized).expect("policy fields always serialize")
    }
}
