//! On-disk corpus layout:
//!
//! ```text
//! <root>/manifest.json               [{doc_id, page_id, text_path, digest}]
//! <root>/<text_path>                 base OCR text, UTF-8 without BOM
//! <root>/events.jsonl                correction events
//! <root>/decisions.jsonl             review decisions (optional, append-only)
//! <root>/mentions/<policy>/<doc>.jsonl   tagger output per variant (optional)
//! ```
//!
//! Digests are `sha256:<hex>` over the UTF-8 bytes of the text.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use provline_core::digest::content_digest;
use provline_core::{BaseDocument, PageId, SpanEditEvent};
use serde::{Deserialize, Serialize};

use super::decisions::{merge_decisions, read_decisions, ReviewDecision};
use super::jsonl::{read_located_events, write_events_jsonl, LocatedEvent};
use super::{write_atomic, write_json_atomic, IoError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const DECISIONS_FILE: &str = "decisions.jsonl";
pub const MENTIONS_DIR: &str = "mentions";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub page_id: PageId,
    pub text_path: String,
    pub digest: String,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub manifest: Vec<ManifestEntry>,
    pub documents: BTreeMap<String, BaseDocument>,
    /// Events as stored, before decisions are merged.
    pub events: Vec<LocatedEvent>,
    pub decisions: Vec<ReviewDecision>,
}

/// Reads a base text, refusing a byte-order mark rather than stripping it.
pub fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(IoError::file(path))?;
    if bytes.starts_with(&[0xEF, 0xBB, 0xBF]) {
        return Err(IoError::ByteOrderMark.in_file(path));
    }
    String::from_utf8(bytes).map_err(|_| IoError::NotUtf8.in_file(path))
}

impl Corpus {
    pub fn load(root: impl Into<PathBuf>) -> Result<Corpus> {
        let root = root.into();
        let manifest_path = root.join(MANIFEST_FILE);
        let raw = std::fs::read(&manifest_path).map_err(IoError::file(&manifest_path))?;
        let manifest: Vec<ManifestEntry> = serde_json::from_slice(&raw)
            .map_err(|source| IoError::Json { line: source.line(), source }.in_file(&manifest_path))?;

        let mut documents = BTreeMap::new();
        for entry in &manifest {
            let text = read_text(&root.join(&entry.text_path))?;
            let found = content_digest(&text);
            if found != entry.digest {
                return Err(IoError::DigestMismatch {
                    doc_id: entry.doc_id.clone(),
                    expected: entry.digest.clone(),
                    found,
                });
            }
            let doc = BaseDocument::new(entry.doc_id.clone(), entry.page_id.clone(), text)?;
            if documents.insert(entry.doc_id.clone(), doc).is_some() {
                return Err(IoError::DuplicateDocument(entry.doc_id.clone()));
            }
        }
        let events = read_located_events(&root.join(EVENTS_FILE))?;
        let decisions = read_decisions(&root.join(DECISIONS_FILE))?;
        Ok(Corpus {
            root,
            manifest,
            documents,
            events,
            decisions,
        })
    }

    /// Writes a fresh corpus with one text file per document under `texts/`.
    pub fn create(root: impl Into<PathBuf>, documents: &[BaseDocument], events: &[SpanEditEvent]) -> Result<Corpus> {
        let root = root.into();
        let mut manifest = Vec::with_capacity(documents.len());
        for doc in documents {
            let text_path = format!("texts/{}.txt", doc.doc_id);
            write_atomic(&root.join(&text_path), doc.text.as_bytes())?;
            manifest.push(ManifestEntry {
                doc_id: doc.doc_id.clone(),
                page_id: doc.page_id.clone(),
                text_path,
                digest: content_digest(&doc.text),
            });
        }
        write_json_atomic(&root.join(MANIFEST_FILE), &manifest)?;
        write_events_jsonl(events, &root.join(EVENTS_FILE))?;
        Corpus::load(root)
    }

    pub fn decisions_path(&self) -> PathBuf {
        self.root.join(DECISIONS_FILE)
    }

    pub fn mentions_dir(&self, policy: &str) -> PathBuf {
        self.root.join(MENTIONS_DIR).join(policy)
    }

    pub fn mentions_path(&self, policy: &str, doc_id: &str) -> PathBuf {
        self.mentions_dir(policy).join(format!("{doc_id}.jsonl"))
    }

    pub fn raw_events(&self) -> Vec<SpanEditEvent> {
        self.events.iter().map(|l| l.record.clone()).collect()
    }

    /// Events with the decisions log applied.
    pub fn effective_events(&self) -> Result<Vec<SpanEditEvent>> {
        merge_decisions(&self.raw_events(), &self.decisions).map_err(|e| e.in_file(self.decisions_path()))
    }

    /// Line number of an event in the events file.
    pub fn line_of(&self, event_id: &str) -> Option<usize> {
        self.events.iter().find(|l| l.record.event_id == event_id).map(|l| l.line)
    }

    /// Events whose `doc_id` is not in the manifest.
    pub fn unresolved(&self) -> Vec<&LocatedEvent> {
        self.events
            .iter()
            .filter(|l| !self.documents.contains_key(&l.record.doc_id))
            .collect()
    }

    /// Groups events by document; every manifest document gets an entry.
    /// Events of unknown documents are dropped, see [`Corpus::unresolved`].
    pub fn by_document(&self, events: &[SpanEditEvent]) -> BTreeMap<String, Vec<SpanEditEvent>> {
        let mut groups: BTreeMap<String, Vec<SpanEditEvent>> =
            self.documents.keys().map(|k| (k.clone(), Vec::new())).collect();
        for e in events {
            if let Some(group) = groups.get_mut(&e.doc_id) {
                group.push(e.clone());
            }
        }
        groups
    }
}
