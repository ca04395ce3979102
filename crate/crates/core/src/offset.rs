//! Bidirectional coordinate mapping between a base text and a variant.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::Span;
use crate::{Error, Result};

/// One piece of the base/variant correspondence. Unedited segments have
/// equal-length spans with identical content; edited segments carry the id
/// of the applied event that replaced `base` with the text at `variant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub base: Span,
    pub variant: Span,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_id: Option<String>,
}

impl Segment {
    pub fn is_edit(&self) -> bool {
        self.event_id.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    BaseToVariant,
    VariantToBase,
}

/// Ordered, gap-free segments covering both coordinate spaces. Order is
/// monotone in both spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetMap {
    segments: Vec<Segment>,
    base_len: usize,
    variant_len: usize,
}

/// Projects a segment onto one of its two coordinate systems.
type Side = fn(&Segment) -> Span;

impl OffsetMap {
    pub fn identity(len: usize) -> Self {
        let segments = if len == 0 {
            Vec::new()
        } else {
            alloc::vec![Segment {
                base: Span::new(0, len),
                variant: Span::new(0, len),
                event_id: None,
            }]
        };
        Self {
            segments,
            base_len: len,
            variant_len: len,
        }
    }

    pub(crate) fn from_segments(segments: Vec<Segment>, base_len: usize, variant_len: usize) -> Self {
        Self {
            segments,
            base_len,
            variant_len,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn variant_len(&self) -> usize {
        self.variant_len
    }

    pub fn is_identity(&self) -> bool {
        self.segments.iter().all(|s| !s.is_edit())
    }

    /// Variant-space image of an applied event's replacement.
    pub fn event_span(&self, event_id: &str) -> Option<Span> {
        self.segments
            .iter()
            .find(|s| s.event_id.as_deref() == Some(event_id))
            .map(|s| s.variant)
    }

    /// Applied edit segments, in order.
    pub fn edits(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.is_edit())
    }

    /// Maps an interval into the other coordinate space.
    ///
    /// A non-empty interval maps to the smallest interval covering its image:
    /// unedited positions map one-to-one, a position inside an edit maps to
    /// the whole replacement on the other side. A zero-width interval strictly
    /// inside an edit maps to that edit's image; at a segment boundary it maps
    /// to the corresponding boundary, left of any zero-width edits there.
    pub fn map_span(&self, span: Span, direction: Direction) -> Result<Span> {
        let (from_len, from, to): (usize, Side, Side) = match direction {
            Direction::BaseToVariant => (self.base_len, |s| s.base, |s| s.variant),
            Direction::VariantToBase => (self.variant_len, |s| s.variant, |s| s.base),
        };
        if span.start > span.end || span.end > from_len {
            return Err(Error::SpanOutOfBounds { span, len: from_len });
        }

        if span.is_empty() {
            let p = span.start;
            let mut boundary = 0;
            for seg in &self.segments {
                let (f, t) = (from(seg), to(seg));
                if f.start < p && p < f.end {
                    return Ok(if seg.is_edit() {
                        t
                    } else {
                        let q = t.start + (p - f.start);
                        Span::new(q, q)
                    });
                }
                if f.start >= p {
                    break;
                }
                boundary = t.end;
            }
            return Ok(Span::new(boundary, boundary));
        }

        let mut hull: Option<Span> = None;
        for seg in &self.segments {
            let (f, t) = (from(seg), to(seg));
            let image = if f.is_empty() {
                (span.start < f.start && f.start < span.end).then_some(t)
            } else if f.start < span.end && span.start < f.end {
                Some(if seg.is_edit() {
                    t
                } else {
                    let lo = span.start.max(f.start);
                    let hi = span.end.min(f.end);
                    Span::new(t.start + (lo - f.start), t.start + (hi - f.start))
                })
            } else {
                None
            };
            if let Some(image) = image {
                hull = Some(match hull {
                    Some(h) => h.hull(&image),
                    None => image,
                });
            }
            if f.start >= span.end {
                break;
            }
        }
        Ok(hull.unwrap_or(span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn seg(b: (usize, usize), v: (usize, usize), id: Option<&str>) -> Segment {
        Segment {
            base: Span::new(b.0, b.1),
            variant: Span::new(v.0, v.1),
            event_id: id.map(String::from),
        }
    }

    // "Madifon went to NewYork." -> "Madison went to New York."
    fn example() -> OffsetMap {
        OffsetMap::from_segments(
            vec![
                seg((0, 7), (0, 7), Some("a")),
                seg((7, 16), (7, 16), None),
                seg((16, 23), (16, 24), Some("b")),
                seg((23, 24), (24, 25), None),
            ],
            24,
            25,
        )
    }

    #[test]
    fn split_span_maps_to_replacement() {
        let m = example();
        assert_eq!(m.map_span(Span::new(16, 23), Direction::BaseToVariant), Ok(Span::new(16, 24)));
        assert_eq!(m.map_span(Span::new(16, 24), Direction::VariantToBase), Ok(Span::new(16, 23)));
    }

    #[test]
    fn unedited_region_is_identity() {
        let m = example();
        assert_eq!(m.map_span(Span::new(8, 12), Direction::BaseToVariant), Ok(Span::new(8, 12)));
        assert_eq!(m.map_span(Span::new(23, 24), Direction::BaseToVariant), Ok(Span::new(24, 25)));
        assert_eq!(m.map_span(Span::new(24, 25), Direction::VariantToBase), Ok(Span::new(23, 24)));
    }

    #[test]
    fn inner_interval_maps_to_whole_edit() {
        let m = example();
        assert_eq!(m.map_span(Span::new(18, 19), Direction::BaseToVariant), Ok(Span::new(16, 24)));
        assert_eq!(m.map_span(Span::new(19, 19), Direction::BaseToVariant), Ok(Span::new(16, 24)));
        assert_eq!(m.map_span(Span::new(20, 24), Direction::VariantToBase), Ok(Span::new(16, 23)));
    }

    #[test]
    fn straddling_interval_covers_both_parts() {
        let m = example();
        assert_eq!(m.map_span(Span::new(12, 20), Direction::BaseToVariant), Ok(Span::new(12, 24)));
    }

    #[test]
    fn identity_map() {
        let m = OffsetMap::identity(10);
        for (a, b) in [(0, 0), (0, 10), (3, 7), (10, 10)] {
            assert_eq!(m.map_span(Span::new(a, b), Direction::BaseToVariant), Ok(Span::new(a, b)));
            assert_eq!(m.map_span(Span::new(a, b), Direction::VariantToBase), Ok(Span::new(a, b)));
        }
        assert!(m.is_identity());
    }

    #[test]
    fn out_of_bounds() {
        let m = example();
        assert!(m.map_span(Span::new(20, 25), Direction::BaseToVariant).is_err());
        assert!(m.map_span(Span::new(5, 4), Direction::BaseToVariant).is_err());
        assert!(m.map_span(Span::new(20, 25), Direction::VariantToBase).is_ok());
    }

    #[test]
    fn insert_and_delete_boundaries() {
        // "abcd": insert "XY" at 2, delete [3,4) -> "abXYc"
        let m = OffsetMap::from_segments(
            vec![
                seg((0, 2), (0, 2), None),
                seg((2, 2), (2, 4), Some("ins")),
                seg((2, 3), (4, 5), None),
                seg((3, 4), (5, 5), Some("del")),
            ],
            4,
            5,
        );
        // Base interval spanning the insertion point picks up the inserted text.
        assert_eq!(m.map_span(Span::new(1, 3), Direction::BaseToVariant), Ok(Span::new(1, 5)));
        // Abutting the insertion point does not.
        assert_eq!(m.map_span(Span::new(0, 2), Direction::BaseToVariant), Ok(Span::new(0, 2)));
        assert_eq!(m.map_span(Span::new(2, 3), Direction::BaseToVariant), Ok(Span::new(4, 5)));
        // Inserted text maps back to the zero-width insertion point.
        assert_eq!(m.map_span(Span::new(2, 4), Direction::VariantToBase), Ok(Span::new(2, 2)));
        // Deleted base text maps to a zero-width variant position.
        assert_eq!(m.map_span(Span::new(3, 4), Direction::BaseToVariant), Ok(Span::new(5, 5)));
        // Zero-width at an insertion point stays left of the inserted text.
        assert_eq!(m.map_span(Span::new(2, 2), Direction::BaseToVariant), Ok(Span::new(2, 2)));
        assert_eq!(m.event_span("ins"), Some(Span::new(2, 4)));
        assert_eq!(m.event_span("del"), Some(Span::new(5, 5)));
    }
}
