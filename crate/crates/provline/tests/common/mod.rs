//! Small corpus shared by the CLI and API tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use provline::io::{write_mentions_jsonl, Corpus};
use provline::report::reconstruct_all;
use provline_core::analysis::EntityMention;
use provline_core::{BaseDocument, ConflictMode, EditType, PageId, ReviewStatus, Source, SpanEditEvent, TrustPolicy};

pub const LETTER: &str = "Letter from Madifon to the council.\nFootnote: NewYork papers.";
pub const MINUTES: &str = "Minutes of the Bofton meeting.";

pub fn event(doc_id: &str, id: &str, text: &str, orig: &str, new: &str, edit_type: EditType) -> SpanEditEvent {
    let byte = text.find(orig).expect("orig occurs in text");
    let start = text[..byte].chars().count();
    SpanEditEvent {
        schema_version: "1.0.0".into(),
        event_id: id.into(),
        doc_id: doc_id.into(),
        page_id: PageId::Number(1),
        base_revision: 0,
        span_start: start,
        span_end: start + orig.chars().count(),
        orig_text: orig.into(),
        new_text: new.into(),
        edit_type,
        source: Source::Model,
        confidence: None,
        review_status: Some(ReviewStatus::Unreviewed),
        reviewer_id: None,
        layout_zone: Some("body".into()),
        note: None,
        extra: BTreeMap::new(),
    }
}

pub fn documents() -> Vec<BaseDocument> {
    vec![
        BaseDocument::new("doc_017", PageId::Number(3), LETTER).unwrap(),
        BaseDocument::new("doc_018", PageId::Number(4), MINUTES).unwrap(),
    ]
}

/// `m1` is the Madifon correction; `s1` a footnote split; `h1` a confident
/// human edit; `b1` the only approved event.
pub fn events() -> Vec<SpanEditEvent> {
    let mut m1 = event("doc_017", "m1", LETTER, "Madifon", "Madison", EditType::Substitute);
    m1.confidence = Some(0.74);
    let mut s1 = event("doc_017", "s1", LETTER, "NewYork", "New York", EditType::Split);
    s1.confidence = Some(0.55);
    s1.layout_zone = Some("footnote".into());
    let mut h1 = event("doc_017", "h1", LETTER, "council", "Council", EditType::Substitute);
    h1.source = Source::Human;
    h1.confidence = Some(0.95);
    let mut b1 = event("doc_018", "b1", MINUTES, "Bofton", "Boston", EditType::Substitute);
    b1.source = Source::Rule;
    b1.confidence = Some(0.90);
    b1.review_status = Some(ReviewStatus::Approved);
    b1.reviewer_id = Some("ana".into());
    vec![m1, s1, h1, b1]
}

/// Capitalized words, with runs separated by single spaces kept together.
pub fn tag(text: &str) -> Vec<(usize, usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut words = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphabetic() {
                i += 1;
            }
            words.push((start, i));
        } else {
            i += 1;
        }
    }
    let mut out: Vec<(usize, usize, String)> = Vec::new();
    for (s, e) in words {
        if chars[s].is_uppercase() {
            match out.last_mut() {
                Some(last) if last.1 + 1 == s && chars[last.1] == ' ' => last.1 = e,
                _ => out.push((s, e, String::new())),
            }
        }
    }
    for m in &mut out {
        m.2 = chars[m.0..m.1].iter().collect();
    }
    out
}

/// Runs the toy tagger over the current variants of `policy` and writes the
/// mention files into the corpus.
pub fn write_mentions(root: &Path, policy: &str) {
    let corpus = Corpus::load(root).unwrap();
    let events = corpus.by_document(&corpus.effective_events().unwrap());
    let policy = TrustPolicy::preset(policy).unwrap();
    let variants = reconstruct_all(&corpus.documents, &events, &policy, ConflictMode::Resolve).unwrap();
    for (doc_id, v) in &variants {
        let mentions: Vec<EntityMention> = tag(&v.text)
            .into_iter()
            .map(|(start, end, surface)| EntityMention {
                doc_id: doc_id.clone(),
                variant_id: v.variant_id.clone(),
                start,
                end,
                surface,
                label: "MISC".into(),
                kb_id: None,
            })
            .collect();
        std::fs::create_dir_all(corpus.mentions_dir(&policy.name)).unwrap();
        write_mentions_jsonl(&mentions, &corpus.mentions_path(&policy.name, doc_id)).unwrap();
    }
}

/// The small corpus with mentions for raw, all, conf70 and approved.
pub fn corpus(dir: &Path) -> PathBuf {
    let root = dir.join("corpus");
    Corpus::create(&root, &documents(), &events()).unwrap();
    for policy in ["raw", "all", "conf70", "approved"] {
        write_mentions(&root, policy);
    }
    root
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sweep")
}

/// Copies the synthetic sweep corpus so tests may write into it.
pub fn fixture_copy(dir: &Path) -> PathBuf {
    let dst = dir.join("sweep");
    copy_tree(&fixture_dir(), &dst);
    dst
}

fn copy_tree(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &to);
        } else {
            std::fs::copy(entry.path(), to).unwrap();
        }
    }
}
