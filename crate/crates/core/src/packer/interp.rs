//! Tree-walking engine: revisits the constructor tree for every element, like an MPI
//! library that keeps the user's description as is.

use std::hint::black_box;

use super::region::{check_packed, check_region, region_len};
use crate::error::Result;
use crate::typecore::{CommittedType, Node, Shape};

/// Runs shorter than this are copied byte by byte.
pub const BYTE_LOOP_LIMIT: usize = 16;

trait Visitor {
    fn run(&mut self, at: usize, len: usize);
}

#[inline]
fn copy_run(dst: &mut [u8], src: &[u8]) {
    if src.len() < BYTE_LOOP_LIMIT {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = black_box(*s);
        }
    } else {
        dst.copy_from_slice(src);
    }
}

struct Packing<'a> {
    src: &'a [u8],
    dst: &'a mut [u8],
    cursor: usize,
}

impl Visitor for Packing<'_> {
    #[inline]
    fn run(&mut self, at: usize, len: usize) {
        let end = self.cursor + len;
        copy_run(&mut self.dst[self.cursor..end], &self.src[at..at + len]);
        self.cursor = end;
    }
}

struct Unpacking<'a> {
    packed: &'a [u8],
    dst: &'a mut [u8],
    cursor: usize,
}

impl Visitor for Unpacking<'_> {
    #[inline]
    fn run(&mut self, at: usize, len: usize) {
        let end = self.cursor + len;
        copy_run(&mut self.dst[at..at + len], &self.packed[self.cursor..end]);
        self.cursor = end;
    }
}

/// `base` is the region index of the node's origin (its displacement 0), which may sit
/// below index 0 when the type's lower bound is positive.
fn walk<V: Visitor>(node: &Node, base: i64, v: &mut V) {
    match &node.shape {
        Shape::Base(kind) => v.run(base as usize, kind.size() as usize),
        Shape::Repeat {
            count,
            blocklen,
            stride,
            inner,
        } => {
            if let Shape::Base(kind) = inner.shape {
                let len = (*blocklen * kind.size()) as usize;
                for j in 0..*count as i64 {
                    v.run((base + j * stride) as usize, len);
                }
                return;
            }
            let ext = inner.extent();
            for j in 0..*count as i64 {
                let block = base + j * stride;
                for e in 0..*blocklen as i64 {
                    walk(inner, block + e * ext, v);
                }
            }
        }
        Shape::Blocks { blocks, inner } => {
            if let Shape::Base(kind) = inner.shape {
                for &(bl, d) in blocks {
                    v.run((base + d) as usize, (bl * kind.size()) as usize);
                }
                return;
            }
            let ext = inner.extent();
            for &(bl, d) in blocks {
                for e in 0..bl as i64 {
                    walk(inner, base + d + e * ext, v);
                }
            }
        }
        Shape::Members(members) => {
            for (count, d, inner) in members {
                if let Shape::Base(kind) = inner.shape {
                    v.run((base + d) as usize, (count * kind.size()) as usize);
                    continue;
                }
                let ext = inner.extent();
                for i in 0..*count as i64 {
                    walk(inner, base + d + i * ext, v);
                }
            }
        }
        Shape::Resized(inner) => walk(inner, base, v),
    }
}

fn walk_instances<V: Visitor>(t: &CommittedType, count: u64, v: &mut V) {
    let node = t.node();
    let ext = t.extent();
    for i in 0..count as i64 {
        walk(node, i * ext - t.lb(), v);
    }
}

fn payload(t: &CommittedType, count: u64) -> usize {
    (t.size() * count) as usize
}

/// Pack `count` instances of `t` from `src` into `dst`, which must hold exactly the payload.
pub fn pack_into(t: &CommittedType, count: u64, src: &[u8], dst: &mut [u8]) -> Result<()> {
    check_region(region_len(t, count)?, src.len())?;
    check_packed(payload(t, count), dst.len())?;
    let mut v = Packing {
        src,
        dst,
        cursor: 0,
    };
    walk_instances(t, count, &mut v);
    Ok(())
}

pub fn pack(t: &CommittedType, count: u64, src: &[u8]) -> Result<Vec<u8>> {
    let mut out = vec![0; payload(t, count)];
    pack_into(t, count, src, &mut out)?;
    Ok(out)
}

/// Scatter `packed` into the typed positions of `dst`; other bytes are left alone.
pub fn unpack(t: &CommittedType, count: u64, packed: &[u8], dst: &mut [u8]) -> Result<()> {
    check_packed(payload(t, count), packed.len())?;
    check_region(region_len(t, count)?, dst.len())?;
    let mut v = Unpacking {
        packed,
        dst,
        cursor: 0,
    };
    walk_instances(t, count, &mut v);
    Ok(())
}
