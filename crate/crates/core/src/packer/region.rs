use crate::error::{Error, Result};
use crate::typecore::CommittedType;

/// Bytes a region must hold so that `count` instances of `t` fit, index 0 being `lb(t)`.
pub fn region_len(t: &CommittedType, count: u64) -> Result<usize> {
    if count == 0 {
        return Ok(0);
    }
    let ext = t.extent();
    let last = (count as i64 - 1)
        .checked_mul(ext)
        .ok_or_else(|| Error::MalformedType("region span overflows".into()))?;
    let mut hi = last + t.extent();
    let mut lo = 0i64;
    if let Some((dlo, dhi)) = t.layout().data_bounds() {
        let (first, final_) = if ext >= 0 { (0, last) } else { (last, 0) };
        lo = lo.min(first + dlo - t.lb());
        hi = hi.max(final_ + dhi - t.lb());
    }
    if lo < 0 {
        return Err(Error::RegionTooSmall {
            needed: (hi - lo) as usize,
            available: hi.max(0) as usize,
        });
    }
    Ok(hi.max(0) as usize)
}

pub(crate) fn check_region(needed: usize, available: usize) -> Result<()> {
    if available < needed {
        Err(Error::RegionTooSmall { needed, available })
    } else {
        Ok(())
    }
}

pub(crate) fn check_packed(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::SizeMismatch { expected, actual })
    } else {
        Ok(())
    }
}
