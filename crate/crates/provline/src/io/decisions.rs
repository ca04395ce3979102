use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::Path;

use chrono::{DateTime, FixedOffset, SecondsFormat, Utc};
use provline_core::{ReviewStatus, SpanEditEvent};
use serde::{Deserialize, Serialize};

use super::jsonl::{Located, JsonlReader};
use super::{IoError, Result};

pub const DECISION_FIELDS: [&str; 4] = ["event_id", "review_status", "reviewer_id", "timestamp"];

/// One reviewer verdict as recorded in the decisions log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewDecision {
    pub event_id: String,
    pub review_status: ReviewStatus,
    pub reviewer_id: String,
    /// RFC 3339.
    pub timestamp: String,
}

impl ReviewDecision {
    /// A decision stamped with the current UTC time.
    pub fn now(event_id: impl Into<String>, review_status: ReviewStatus, reviewer_id: impl Into<String>) -> Self {
        ReviewDecision {
            event_id: event_id.into(),
            review_status,
            reviewer_id: reviewer_id.into(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
        }
    }
}

/// Reads the log in order; a missing file is an empty log.
pub fn read_decisions(path: &Path) -> Result<Vec<ReviewDecision>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(IoError::File { path: path.into(), source }),
    };
    JsonlReader::<_, ReviewDecision>::new(BufReader::new(file), &DECISION_FIELDS)
        .map(|r| r.map(|l: Located<ReviewDecision>| l.record))
        .collect::<Result<_>>()
        .map_err(|e| e.in_file(path))
}

/// Appends one decision and syncs it to disk before returning.
pub fn append_decision(path: &Path, decision: &ReviewDecision) -> Result<()> {
    let mut line = serde_json::to_vec(decision).map_err(|source| IoError::Json { line: 0, source })?;
    line.push(b'\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(IoError::file(path))?;
    file.write_all(&line).map_err(IoError::file(path))?;
    file.sync_all().map_err(IoError::file(path))
}

/// Applies the log to `events` without touching either input.
///
/// The effective decision for an event is the one with the latest
/// timestamp; among equal timestamps the later log entry wins. Events with
/// no decision keep their recorded status. Merging is idempotent.
pub fn merge_decisions(events: &[SpanEditEvent], decisions: &[ReviewDecision]) -> Result<Vec<SpanEditEvent>> {
    let index: HashMap<&str, usize> = events.iter().enumerate().map(|(i, e)| (e.event_id.as_str(), i)).collect();
    let mut latest: BTreeMap<usize, (DateTime<FixedOffset>, usize)> = BTreeMap::new();
    for (n, d) in decisions.iter().enumerate() {
        let line = n + 1;
        let &target = index.get(d.event_id.as_str()).ok_or_else(|| IoError::UnknownEvent {
            event_id: d.event_id.clone(),
            line,
        })?;
        let at = DateTime::parse_from_rfc3339(&d.timestamp).map_err(|_| IoError::Timestamp {
            timestamp: d.timestamp.clone(),
            line,
        })?;
        match latest.get(&target) {
            Some(&(prev, _)) if prev > at => {}
            _ => {
                latest.insert(target, (at, n));
            }
        }
    }
    let mut merged = events.to_vec();
    for (target, (_, n)) in latest {
        merged[target].review_status = Some(decisions[n].review_status);
        merged[target].reviewer_id = Some(decisions[n].reviewer_id.clone());
    }
    Ok(merged)
}
