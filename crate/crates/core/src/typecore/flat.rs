use serde::{Deserialize, Serialize};

/// One contiguous byte range, relative to the base of the first instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(i64, u64)", into = "(i64, u64)")]
pub struct Segment {
    pub offset: i64,
    pub len: u64,
}

impl Segment {
    pub const fn new(offset: i64, len: u64) -> Self {
        Segment { offset, len }
    }

    pub const fn end(&self) -> i64 {
        self.offset + self.len as i64
    }
}

impl From<(i64, u64)> for Segment {
    fn from((offset, len): (i64, u64)) -> Self {
        Segment { offset, len }
    }
}

impl From<Segment> for (i64, u64) {
    fn from(s: Segment) -> Self {
        (s.offset, s.len)
    }
}

/// Accumulates segments in serialization order, merging abutting ranges on the fly.
#[derive(Debug, Default)]
pub(crate) struct SegmentSink {
    segments: Vec<Segment>,
}

impl SegmentSink {
    #[inline]
    pub fn push(&mut self, offset: i64, len: u64) {
        if len == 0 {
            return;
        }
        if let Some(last) = self.segments.last_mut() {
            if last.end() == offset {
                last.len += len;
                return;
            }
        }
        self.segments.push(Segment { offset, len });
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }
}

/// Merge abutting segments and drop empty ones. Order is never changed.
pub fn canonicalize(segments: &[Segment]) -> Vec<Segment> {
    let mut sink = SegmentSink::default();
    for s in segments {
        sink.push(s.offset, s.len);
    }
    sink.into_segments()
}

/// The canonical, ordered segment list denoted by `count` instances of a type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatLayout {
    pub segments: Vec<Segment>,
    pub total_size: u64,
    pub lb: i64,
    pub extent: i64,
    pub overlapping: bool,
}

impl FlatLayout {
    pub(crate) fn from_segments(segments: Vec<Segment>, lb: i64, extent: i64) -> Self {
        let total_size = segments.iter().map(|s| s.len).sum();
        let overlapping = has_overlap(&segments);
        FlatLayout {
            segments,
            total_size,
            lb,
            extent,
            overlapping,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Lowest and one-past-highest touched byte, if any byte is touched.
    pub fn data_bounds(&self) -> Option<(i64, i64)> {
        let lo = self.segments.iter().map(|s| s.offset).min()?;
        let hi = self.segments.iter().map(|s| s.end()).max()?;
        Some((lo, hi))
    }

    /// Segments as plain `(offset, len)` pairs.
    pub fn pairs(&self) -> Vec<(i64, u64)> {
        self.segments.iter().map(|&s| s.into()).collect()
    }
}

fn has_overlap(segments: &[Segment]) -> bool {
    // Catalog layouts are usually already sorted, so check that first.
    if segments.windows(2).all(|w| w[0].end() <= w[1].offset) {
        return false;
    }
    let mut sorted = segments.to_vec();
    sorted.sort_unstable_by_key(|s| s.offset);
    sorted.windows(2).any(|w| w[0].end() > w[1].offset)
}
