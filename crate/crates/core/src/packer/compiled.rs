//! Segment-copy engine: the flattened layout is compiled once into copy instructions.

use serde::Serialize;

use super::region::{check_packed, check_region, region_len};
use crate::error::Result;
use crate::typecore::CommittedType;

/// Ordered `(region offset, length)` copy instructions for `count` instances of a type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PackProgram {
    pub ops: Vec<(usize, usize)>,
    pub total_bytes: usize,
    /// Minimum region length the program reads from or writes to.
    pub region_len: usize,
}

pub fn compile(t: &CommittedType, count: u64) -> Result<PackProgram> {
    let region_len = region_len(t, count)?;
    let layout = t.flatten(count)?;
    let lb = t.lb();
    let ops: Vec<(usize, usize)> = layout
        .segments
        .iter()
        .map(|s| ((s.offset - lb) as usize, s.len as usize))
        .collect();
    Ok(PackProgram {
        total_bytes: layout.total_size as usize,
        ops,
        region_len,
    })
}

impl PackProgram {
    pub fn pack_into(&self, src: &[u8], dst: &mut [u8]) -> Result<()> {
        check_region(self.region_len, src.len())?;
        check_packed(self.total_bytes, dst.len())?;
        run_pack(&self.ops, src, dst);
        Ok(())
    }

    pub fn pack(&self, src: &[u8]) -> Result<Vec<u8>> {
        let mut out = vec![0; self.total_bytes];
        self.pack_into(src, &mut out)?;
        Ok(out)
    }

    pub fn unpack(&self, packed: &[u8], dst: &mut [u8]) -> Result<()> {
        check_packed(self.total_bytes, packed.len())?;
        check_region(self.region_len, dst.len())?;
        let mut cursor = 0;
        for &(at, len) in &self.ops {
            dst[at..at + len].copy_from_slice(&packed[cursor..cursor + len]);
            cursor += len;
        }
        Ok(())
    }
}

pub(crate) fn run_pack(ops: &[(usize, usize)], src: &[u8], dst: &mut [u8]) {
    let mut cursor = 0;
    for &(at, len) in ops {
        dst[cursor..cursor + len].copy_from_slice(&src[at..at + len]);
        cursor += len;
    }
}

pub fn pack_compiled(p: &PackProgram, src: &[u8]) -> Result<Vec<u8>> {
    p.pack(src)
}
