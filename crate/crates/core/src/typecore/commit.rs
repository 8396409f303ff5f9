use std::sync::Arc;

use super::base::BaseKind;
use super::datatype::Datatype;
use super::flat::{FlatLayout, Segment, SegmentSink};
use crate::error::{Error, Result};

/// Size and bounds of a type, following the MPI type-map rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeAttrs {
    pub size: u64,
    pub lb: i64,
    pub ub: i64,
}

impl TypeAttrs {
    pub const fn extent(&self) -> i64 {
        self.ub - self.lb
    }
}

/// Annotated constructor tree used by the flattener and the interpreted engine.
///
/// `Contiguous`, `Vector` and `HVector` all lower to `Repeat`; both index
/// constructors lower to `Blocks` with byte displacements.
#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub attrs: TypeAttrs,
    pub shape: Shape,
}

#[derive(Clone, Debug)]
pub(crate) enum Shape {
    Base(BaseKind),
    /// `count` blocks at `j * stride` bytes, each `blocklen` consecutive instances of `inner`.
    Repeat {
        count: u64,
        blocklen: u64,
        stride: i64,
        inner: Box<Node>,
    },
    /// `(blocklen, displacement in bytes)` blocks of `inner`.
    Blocks {
        blocks: Vec<(u64, i64)>,
        inner: Box<Node>,
    },
    /// `(count, displacement in bytes, type)` members.
    Members(Vec<(u64, i64, Node)>),
    Resized(Box<Node>),
}

impl Node {
    pub fn extent(&self) -> i64 {
        self.attrs.extent()
    }
}

fn overflow() -> Error {
    Error::MalformedType("arithmetic overflow in type bounds".into())
}

fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or_else(overflow)
}

fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or_else(overflow)
}

fn nonneg(value: i64, what: &str) -> Result<u64> {
    u64::try_from(value).map_err(|_| Error::MalformedType(format!("negative {what}: {value}")))
}

fn as_i64(v: u64) -> Result<i64> {
    i64::try_from(v).map_err(|_| overflow())
}

/// Running lower/upper bound over the non-empty parts of a type map.
#[derive(Default)]
struct Bounds(Option<(i64, i64)>);

impl Bounds {
    fn include(&mut self, lo: i64, hi: i64) {
        self.0 = Some(match self.0 {
            None => (lo, hi),
            Some((l, h)) => (l.min(lo), h.max(hi)),
        });
    }

    fn finish(self, size: u64) -> TypeAttrs {
        let (lb, ub) = self.0.unwrap_or((0, 0));
        TypeAttrs { size, lb, ub }
    }
}

fn lower_repeat(count: u64, blocklen: u64, stride: i64, inner: Node) -> Result<Node> {
    let ext = inner.extent();
    let mut bounds = Bounds::default();
    if count > 0 && blocklen > 0 {
        let last = mul(as_i64(count - 1)?, stride)?;
        let block_tail = mul(as_i64(blocklen - 1)?, ext)?;
        let lo = add(last.min(0), inner.attrs.lb)?;
        let hi = add(add(last.max(0), inner.attrs.ub)?, block_tail)?;
        bounds.include(lo, hi);
    }
    let size = count
        .checked_mul(blocklen)
        .and_then(|n| n.checked_mul(inner.attrs.size))
        .ok_or_else(overflow)?;
    Ok(Node {
        attrs: bounds.finish(size),
        shape: Shape::Repeat {
            count,
            blocklen,
            stride,
            inner: Box::new(inner),
        },
    })
}

fn lower_blocks(blocks: Vec<(u64, i64)>, inner: Node) -> Result<Node> {
    let ext = inner.extent();
    let mut bounds = Bounds::default();
    let mut elems: u64 = 0;
    for &(bl, d) in &blocks {
        if bl == 0 {
            continue;
        }
        let lo = add(d, inner.attrs.lb)?;
        let hi = add(add(d, inner.attrs.ub)?, mul(as_i64(bl - 1)?, ext)?)?;
        bounds.include(lo, hi);
        elems = elems.checked_add(bl).ok_or_else(overflow)?;
    }
    let size = elems.checked_mul(inner.attrs.size).ok_or_else(overflow)?;
    Ok(Node {
        attrs: bounds.finish(size),
        shape: Shape::Blocks {
            blocks,
            inner: Box::new(inner),
        },
    })
}

pub(crate) fn lower(t: &Datatype) -> Result<Node> {
    match t {
        Datatype::Base { base } => Ok(Node {
            attrs: TypeAttrs {
                size: base.size(),
                lb: 0,
                ub: base.size() as i64,
            },
            shape: Shape::Base(*base),
        }),
        Datatype::Contiguous { count, inner } => {
            let count = nonneg(*count, "count")?;
            lower_repeat(1, count, 0, lower(inner)?)
        }
        Datatype::Vector {
            count,
            blocklen,
            stride,
            inner,
        } => {
            let count = nonneg(*count, "count")?;
            let blocklen = nonneg(*blocklen, "blocklen")?;
            let inner = lower(inner)?;
            let stride = mul(*stride, inner.extent())?;
            lower_repeat(count, blocklen, stride, inner)
        }
        Datatype::HVector {
            count,
            blocklen,
            stride_bytes,
            inner,
        } => {
            let count = nonneg(*count, "count")?;
            let blocklen = nonneg(*blocklen, "blocklen")?;
            lower_repeat(count, blocklen, *stride_bytes, lower(inner)?)
        }
        Datatype::Indexed { blocks, inner } => {
            let inner = lower(inner)?;
            let ext = inner.extent();
            let blocks = blocks
                .iter()
                .map(|&(bl, d)| Ok((nonneg(bl, "blocklen")?, mul(d, ext)?)))
                .collect::<Result<Vec<_>>>()?;
            lower_blocks(blocks, inner)
        }
        Datatype::IndexedBlock {
            blocklen,
            displs,
            inner,
        } => {
            let bl = nonneg(*blocklen, "blocklen")?;
            let inner = lower(inner)?;
            let ext = inner.extent();
            let blocks = displs
                .iter()
                .map(|&d| Ok((bl, mul(d, ext)?)))
                .collect::<Result<Vec<_>>>()?;
            lower_blocks(blocks, inner)
        }
        Datatype::Composite { members } => {
            let mut bounds = Bounds::default();
            let mut size: u64 = 0;
            let mut lowered = Vec::with_capacity(members.len());
            for m in members {
                let count = nonneg(m.count, "member count")?;
                let node = lower(&m.inner)?;
                if count > 0 {
                    let lo = add(m.displ_bytes, node.attrs.lb)?;
                    let tail = mul(as_i64(count - 1)?, node.extent())?;
                    let hi = add(add(m.displ_bytes, node.attrs.ub)?, tail)?;
                    bounds.include(lo, hi);
                }
                size = count
                    .checked_mul(node.attrs.size)
                    .and_then(|s| s.checked_add(size))
                    .ok_or_else(overflow)?;
                lowered.push((count, m.displ_bytes, node));
            }
            Ok(Node {
                attrs: bounds.finish(size),
                shape: Shape::Members(lowered),
            })
        }
        Datatype::Resized { lb, extent, inner } => {
            nonneg(*extent, "extent")?;
            let inner = lower(inner)?;
            Ok(Node {
                attrs: TypeAttrs {
                    size: inner.attrs.size,
                    lb: *lb,
                    ub: add(*lb, *extent)?,
                },
                shape: Shape::Resized(Box::new(inner)),
            })
        }
    }
}

/// Size and bounds of `t` without flattening it.
pub fn attributes(t: &Datatype) -> Result<TypeAttrs> {
    lower(t).map(|n| n.attrs)
}

fn emit(node: &Node, base: i64, sink: &mut SegmentSink) {
    match &node.shape {
        Shape::Base(kind) => sink.push(base, kind.size()),
        Shape::Repeat {
            count,
            blocklen,
            stride,
            inner,
        } => {
            let ext = inner.extent();
            let inner_segs = segments_of(inner);
            for j in 0..*count as i64 {
                let block = base + j * stride;
                for e in 0..*blocklen as i64 {
                    let at = block + e * ext;
                    for s in &inner_segs {
                        sink.push(at + s.offset, s.len);
                    }
                }
            }
        }
        Shape::Blocks { blocks, inner } => {
            let ext = inner.extent();
            let inner_segs = segments_of(inner);
            for &(bl, d) in blocks {
                for e in 0..bl as i64 {
                    let at = base + d + e * ext;
                    for s in &inner_segs {
                        sink.push(at + s.offset, s.len);
                    }
                }
            }
        }
        Shape::Members(members) => {
            for (count, d, inner) in members {
                let ext = inner.extent();
                let inner_segs = segments_of(inner);
                for i in 0..*count as i64 {
                    let at = base + d + i * ext;
                    for s in &inner_segs {
                        sink.push(at + s.offset, s.len);
                    }
                }
            }
        }
        Shape::Resized(inner) => emit(inner, base, sink),
    }
}

fn segments_of(node: &Node) -> Vec<Segment> {
    let mut sink = SegmentSink::default();
    emit(node, 0, &mut sink);
    sink.into_segments()
}

fn flatten_node(node: &Node, count: u64) -> Result<FlatLayout> {
    let ext = node.extent();
    let per_instance = segments_of(node);
    let mut sink = SegmentSink::default();
    for i in 0..as_i64(count)? {
        let base = mul(i, ext)?;
        for s in &per_instance {
            sink.push(base + s.offset, s.len);
        }
    }
    Ok(FlatLayout::from_segments(
        sink.into_segments(),
        node.attrs.lb,
        mul(as_i64(count)?, ext)?,
    ))
}

/// A validated datatype with cached bounds and its single-instance layout.
#[derive(Clone, Debug)]
pub struct CommittedType {
    datatype: Arc<Datatype>,
    node: Arc<Node>,
    layout: FlatLayout,
}

impl CommittedType {
    pub fn datatype(&self) -> &Arc<Datatype> {
        &self.datatype
    }

    pub fn attrs(&self) -> TypeAttrs {
        self.node.attrs
    }

    pub fn size(&self) -> u64 {
        self.node.attrs.size
    }

    pub fn lb(&self) -> i64 {
        self.node.attrs.lb
    }

    pub fn ub(&self) -> i64 {
        self.node.attrs.ub
    }

    pub fn extent(&self) -> i64 {
        self.node.extent()
    }

    /// Layout of a single instance.
    pub fn layout(&self) -> &FlatLayout {
        &self.layout
    }

    pub fn flatten(&self, count: u64) -> Result<FlatLayout> {
        if count == 1 {
            return Ok(self.layout.clone());
        }
        flatten_node(&self.node, count)
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }
}

/// Validate `t` and cache its attributes and single-instance layout.
pub fn commit(t: &Datatype) -> Result<CommittedType> {
    commit_arc(Arc::new(t.clone()))
}

pub fn commit_arc(t: Arc<Datatype>) -> Result<CommittedType> {
    let node = lower(&t)?;
    let layout = flatten_node(&node, 1)?;
    Ok(CommittedType {
        datatype: t,
        node: Arc::new(node),
        layout,
    })
}

/// Segments of `count` consecutive instances of `t`, instance `i` based at `i * extent(t)`.
pub fn flatten(t: &Datatype, count: u64) -> Result<FlatLayout> {
    flatten_node(&lower(t)?, count)
}

/// True iff both descriptions denote the same ordered byte segments.
pub fn equivalent(t1: &Datatype, c1: u64, t2: &Datatype, c2: u64) -> Result<bool> {
    Ok(flatten(t1, c1)?.segments == flatten(t2, c2)?.segments)
}
