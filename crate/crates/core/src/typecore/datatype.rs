use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::base::BaseKind;

/// A constructor tree describing a typed memory layout and its serialization order.
///
/// Counts are signed so that malformed input survives parsing and is rejected by
/// [`commit`](super::commit) with a proper error instead of a decode failure.
/// Strides and displacements are in units of the inner extent, except for
/// `HVector::stride_bytes` and `Member::displ_bytes`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Datatype {
    Base {
        base: BaseKind,
    },
    Contiguous {
        count: i64,
        inner: Arc<Datatype>,
    },
    Vector {
        count: i64,
        blocklen: i64,
        stride: i64,
        inner: Arc<Datatype>,
    },
    #[serde(rename = "hvector")]
    HVector {
        count: i64,
        blocklen: i64,
        stride_bytes: i64,
        inner: Arc<Datatype>,
    },
    /// Blocks are `(blocklen, displacement)` pairs.
    Indexed {
        blocks: Vec<(i64, i64)>,
        inner: Arc<Datatype>,
    },
    IndexedBlock {
        blocklen: i64,
        displs: Vec<i64>,
        inner: Arc<Datatype>,
    },
    Composite {
        members: Vec<Member>,
    },
    Resized {
        lb: i64,
        extent: i64,
        inner: Arc<Datatype>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Member {
    pub count: i64,
    pub displ_bytes: i64,
    pub inner: Arc<Datatype>,
}

impl Member {
    pub fn new(count: i64, displ_bytes: i64, inner: impl Into<Arc<Datatype>>) -> Self {
        Member {
            count,
            displ_bytes,
            inner: inner.into(),
        }
    }
}

impl Datatype {
    pub fn base(base: BaseKind) -> Self {
        Datatype::Base { base }
    }

    pub fn contiguous(count: i64, inner: impl Into<Arc<Datatype>>) -> Self {
        Datatype::Contiguous {
            count,
            inner: inner.into(),
        }
    }

    pub fn vector(count: i64, blocklen: i64, stride: i64, inner: impl Into<Arc<Datatype>>) -> Self {
        Datatype::Vector {
            count,
            blocklen,
            stride,
            inner: inner.into(),
        }
    }

    pub fn hvector(
        count: i64,
        blocklen: i64,
        stride_bytes: i64,
        inner: impl Into<Arc<Datatype>>,
    ) -> Self {
        Datatype::HVector {
            count,
            blocklen,
            stride_bytes,
            inner: inner.into(),
        }
    }

    pub fn indexed(blocks: Vec<(i64, i64)>, inner: impl Into<Arc<Datatype>>) -> Self {
        Datatype::Indexed {
            blocks,
            inner: inner.into(),
        }
    }

    pub fn indexed_block(blocklen: i64, displs: Vec<i64>, inner: impl Into<Arc<Datatype>>) -> Self {
        Datatype::IndexedBlock {
            blocklen,
            displs,
            inner: inner.into(),
        }
    }

    pub fn composite(members: Vec<Member>) -> Self {
        Datatype::Composite { members }
    }

    pub fn resized(lb: i64, extent: i64, inner: impl Into<Arc<Datatype>>) -> Self {
        Datatype::Resized {
            lb,
            extent,
            inner: inner.into(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Datatype::Base { .. } => "base",
            Datatype::Contiguous { .. } => "contiguous",
            Datatype::Vector { .. } => "vector",
            Datatype::HVector { .. } => "hvector",
            Datatype::Indexed { .. } => "indexed",
            Datatype::IndexedBlock { .. } => "indexed_block",
            Datatype::Composite { .. } => "composite",
            Datatype::Resized { .. } => "resized",
        }
    }

    /// Direct children in declaration order.
    pub fn children(&self) -> Vec<&Arc<Datatype>> {
        match self {
            Datatype::Base { .. } => Vec::new(),
            Datatype::Contiguous { inner, .. }
            | Datatype::Vector { inner, .. }
            | Datatype::HVector { inner, .. }
            | Datatype::Indexed { inner, .. }
            | Datatype::IndexedBlock { inner, .. }
            | Datatype::Resized { inner, .. } => vec![inner],
            Datatype::Composite { members } => members.iter().map(|m| &m.inner).collect(),
        }
    }

    /// Tree size where every list entry (index block, struct member) counts as a node.
    pub fn node_count(&self) -> u64 {
        match self {
            Datatype::Base { .. } => 1,
            Datatype::Contiguous { inner, .. }
            | Datatype::Vector { inner, .. }
            | Datatype::HVector { inner, .. }
            | Datatype::Resized { inner, .. } => 1 + inner.node_count(),
            Datatype::Indexed { blocks, inner } => 1 + blocks.len() as u64 + inner.node_count(),
            Datatype::IndexedBlock { displs, inner, .. } => {
                1 + displs.len() as u64 + inner.node_count()
            }
            Datatype::Composite { members } => {
                1 + members
                    .iter()
                    .map(|m| 1 + m.inner.node_count())
                    .sum::<u64>()
            }
        }
    }

    /// Every base kind reachable from this node, in first-seen order.
    pub fn base_kinds(&self) -> Vec<BaseKind> {
        let mut out = Vec::new();
        self.collect_bases(&mut out);
        out
    }

    fn collect_bases(&self, out: &mut Vec<BaseKind>) {
        if let Datatype::Base { base } = self {
            if !out.contains(base) {
                out.push(*base);
            }
        }
        for child in self.children() {
            child.collect_bases(out);
        }
    }
}

impl From<BaseKind> for Datatype {
    fn from(base: BaseKind) -> Self {
        Datatype::base(base)
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    const MAX_SHOWN: usize = 6;
    f.write_str("[")?;
    for (i, item) in items.iter().take(MAX_SHOWN).enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{item}")?;
    }
    if items.len() > MAX_SHOWN {
        write!(f, ",..{} more", items.len() - MAX_SHOWN)?;
    }
    f.write_str("]")
}

struct Pair(i64, i64);

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.0, self.1)
    }
}

/// Compact single-line rendering, used for labels and diagnostics.
impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datatype::Base { base } => write!(f, "{base}"),
            Datatype::Contiguous { count, inner } => write!(f, "contig({count},{inner})"),
            Datatype::Vector {
                count,
                blocklen,
                stride,
                inner,
            } => write!(f, "vector({count},{blocklen},{stride},{inner})"),
            Datatype::HVector {
                count,
                blocklen,
                stride_bytes,
                inner,
            } => write!(f, "hvector({count},{blocklen},{stride_bytes}B,{inner})"),
            Datatype::Indexed { blocks, inner } => {
                f.write_str("indexed(")?;
                let pairs: Vec<Pair> = blocks.iter().map(|&(b, d)| Pair(b, d)).collect();
                write_list(f, &pairs)?;
                write!(f, ",{inner})")
            }
            Datatype::IndexedBlock {
                blocklen,
                displs,
                inner,
            } => {
                write!(f, "indexed_block({blocklen},")?;
                write_list(f, displs)?;
                write!(f, ",{inner})")
            }
            Datatype::Composite { members } => {
                f.write_str("struct(")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}x{}@{}B", m.count, m.inner, m.displ_bytes)?;
                }
                f.write_str(")")
            }
            Datatype::Resized { lb, extent, inner } => {
                write!(f, "resized({lb},{extent},{inner})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int() -> Datatype {
        Datatype::base(BaseKind::Int)
    }

    #[test]
    fn json_shape_is_tagged_by_kind() {
        let t = Datatype::resized(0, 20, Datatype::contiguous(3, int()));
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "kind": "resized", "lb": 0, "extent": 20,
                "inner": {"kind": "contiguous", "count": 3,
                          "inner": {"kind": "base", "base": "INT"}}
            })
        );
        let back: Datatype = serde_json::from_value(json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn json_lists() {
        let t = Datatype::composite(vec![
            Member::new(1, 0, Datatype::indexed(vec![(2, 0), (4, 5)], int())),
            Member::new(2, 64, Datatype::hvector(2, 1, 12, int())),
        ]);
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.contains("\"blocks\":[[2,0],[4,5]]"));
        assert!(text.contains("\"kind\":\"hvector\""));
        assert!(text.contains("\"displ_bytes\":64"));
        assert_eq!(serde_json::from_str::<Datatype>(&text).unwrap(), t);
    }

    #[test]
    fn node_count_counts_list_entries() {
        assert_eq!(int().node_count(), 1);
        let tiled = Datatype::resized(0, 16, Datatype::contiguous(2, int()));
        assert_eq!(tiled.node_count(), 3);
        let listing = Datatype::indexed_block(2, vec![0, 4, 8, 12], int());
        assert_eq!(listing.node_count(), 6);
        let s = Datatype::composite(vec![Member::new(1, 0, int()), Member::new(1, 8, int())]);
        assert_eq!(s.node_count(), 5);
    }

    #[test]
    fn display_is_compact() {
        let t = Datatype::indexed_block(1, (0..10).collect(), int());
        assert_eq!(t.to_string(), "indexed_block(1,[0,1,2,3,4,5,..4 more],INT)");
    }
}
