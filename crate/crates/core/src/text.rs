//! Codepoint addressing over UTF-8 strings.

use alloc::vec::Vec;

/// Byte offsets of every codepoint boundary in a string, so that codepoint
/// ranges can be sliced in O(1).
#[derive(Debug, Clone)]
pub struct CodepointIndex<'a> {
    text: &'a str,
    bounds: Vec<usize>,
}

impl<'a> CodepointIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        bounds.push(text.len());
        Self { text, bounds }
    }

    /// Number of codepoints.
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Slice `[start, end)` in codepoints; `None` when out of range or reversed.
    pub fn slice(&self, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.len() {
            return None;
        }
        Some(&self.text[self.bounds[start]..self.bounds[end]])
    }

    pub fn as_str(&self) -> &'a str {
        self.text
    }
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slice a string by codepoints without building an index.
pub fn slice_chars(s: &str, start: usize, end: usize) -> Option<&str> {
    CodepointIndex::new(s).slice(start, end)
}
