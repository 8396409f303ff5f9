use super::compiled::{run_pack, PackProgram};
use super::region::{check_packed, check_region};
use crate::error::Result;
use crate::par;

/// Ops per parallel task; small programs run on the calling thread.
const CHUNK_OPS: usize = 4096;

/// Pack with the compiled program split over disjoint output slices.
///
/// Byte-identical to [`PackProgram::pack_into`]; runs sequentially without the
/// `parallel` feature.
pub fn pack_compiled_par_into(p: &PackProgram, src: &[u8], dst: &mut [u8]) -> Result<()> {
    check_region(p.region_len, src.len())?;
    check_packed(p.total_bytes, dst.len())?;
    if p.ops.len() <= CHUNK_OPS {
        run_pack(&p.ops, src, dst);
        return Ok(());
    }
    let mut tasks = Vec::with_capacity(p.ops.len().div_ceil(CHUNK_OPS));
    let mut rest = dst;
    for ops in p.ops.chunks(CHUNK_OPS) {
        let bytes = ops.iter().map(|op| op.1).sum();
        let (head, tail) = rest.split_at_mut(bytes);
        tasks.push((ops, head));
        rest = tail;
    }
    par::for_each_mut(&mut tasks, |(ops, out)| run_pack(ops, src, out));
    Ok(())
}

pub fn pack_compiled_par(p: &PackProgram, src: &[u8]) -> Result<Vec<u8>> {
    let mut out = vec![0; p.total_bytes];
    pack_compiled_par_into(p, src, &mut out)?;
    Ok(out)
}
