//! Local rewrites. Each returns a candidate with the same ordered segments as its
//! input; bounds are restored by the caller.

use std::sync::Arc;

use crate::error::Result;
use crate::typecore::{attributes, Datatype, Member};

pub(crate) type Pass = fn(&Datatype) -> Result<Option<Datatype>>;

pub(crate) const PASSES: [(&str, Pass); 7] = [
    ("resized_fold", resized_fold),
    ("dense_collapse", dense_collapse),
    ("vector_fusion", vector_fusion),
    ("struct_to_indexed", struct_to_indexed),
    ("indexed_to_block", indexed_to_block),
    ("regular_stride", regular_stride),
    ("merge_adjacent", merge_adjacent),
];

/// Longest repeating group the periodic detector tries.
const MAX_PERIOD: usize = 16;

fn extent(t: &Datatype) -> Result<i64> {
    Ok(attributes(t)?.extent())
}

fn resized_fold(t: &Datatype) -> Result<Option<Datatype>> {
    let Datatype::Resized { lb, extent, inner } = t else {
        return Ok(None);
    };
    if let Datatype::Resized { inner: deeper, .. } = inner.as_ref() {
        return Ok(Some(Datatype::resized(*lb, *extent, deeper.clone())));
    }
    let a = attributes(inner)?;
    Ok((a.lb == *lb && a.extent() == *extent).then(|| inner.as_ref().clone()))
}

fn dense_collapse(t: &Datatype) -> Result<Option<Datatype>> {
    Ok(match t {
        Datatype::Contiguous { count: 1, inner } => Some(inner.as_ref().clone()),
        Datatype::Contiguous { count, inner } => match inner.as_ref() {
            Datatype::Contiguous {
                count: c2,
                inner: u,
            } => Some(Datatype::contiguous(count * c2, u.clone())),
            _ => None,
        },
        Datatype::Vector {
            count,
            blocklen,
            stride,
            inner,
        } => {
            if *count == 1 {
                Some(Datatype::contiguous(*blocklen, inner.clone()))
            } else if stride == blocklen {
                Some(Datatype::contiguous(count * blocklen, inner.clone()))
            } else if let Some((k, u)) = unit_contiguous(inner) {
                Some(Datatype::vector(*count, blocklen * k, stride * k, u))
            } else {
                None
            }
        }
        Datatype::HVector {
            count,
            blocklen,
            stride_bytes,
            inner,
        } => {
            if *count == 1 {
                Some(Datatype::contiguous(*blocklen, inner.clone()))
            } else if *stride_bytes == blocklen * extent(inner)? {
                Some(Datatype::contiguous(count * blocklen, inner.clone()))
            } else if let Some((k, u)) = unit_contiguous(inner) {
                Some(Datatype::hvector(*count, blocklen * k, *stride_bytes, u))
            } else {
                None
            }
        }
        Datatype::Indexed { blocks, inner } => unit_contiguous(inner).map(|(k, u)| {
            Datatype::indexed(blocks.iter().map(|&(bl, d)| (bl * k, d * k)).collect(), u)
        }),
        Datatype::IndexedBlock {
            blocklen,
            displs,
            inner,
        } => unit_contiguous(inner).map(|(k, u)| {
            Datatype::indexed_block(blocklen * k, displs.iter().map(|d| d * k).collect(), u)
        }),
        Datatype::Composite { members } => {
            let mut changed = false;
            let members = members
                .iter()
                .map(|m| match unit_contiguous(&m.inner) {
                    Some((k, u)) => {
                        changed = true;
                        Member::new(m.count * k, m.displ_bytes, u)
                    }
                    None => m.clone(),
                })
                .collect();
            changed.then(|| Datatype::composite(members))
        }
        _ => None,
    })
}

/// `Contiguous(k, u)` with `k > 0`, whose extent is exactly `k` times that of `u`.
fn unit_contiguous(t: &Datatype) -> Option<(i64, Arc<Datatype>)> {
    match t {
        Datatype::Contiguous { count, inner } if *count > 0 => Some((*count, inner.clone())),
        _ => None,
    }
}

fn vector_fusion(t: &Datatype) -> Result<Option<Datatype>> {
    // Outer stride in bytes plus the strided inner type it repeats.
    let (count, outer_stride, inner) = match t {
        Datatype::Vector {
            count,
            blocklen: 1,
            stride,
            inner,
        } => (*count, stride * extent(inner)?, inner),
        Datatype::HVector {
            count,
            blocklen,
            stride_bytes,
            inner,
        } => {
            let ext = extent(inner)?;
            if *blocklen != 1 {
                return Ok(hvector_to_vector(
                    *count,
                    *blocklen,
                    *stride_bytes,
                    inner,
                    ext,
                ));
            }
            match hvector_to_vector(*count, 1, *stride_bytes, inner, ext) {
                Some(v) if !matches!(inner.as_ref(), Datatype::Vector { .. }) => {
                    return Ok(Some(v))
                }
                _ => (*count, *stride_bytes, inner),
            }
        }
        _ => return Ok(None),
    };
    let Datatype::Vector {
        count: c_in,
        blocklen,
        stride: s_in,
        inner: u,
    } = inner.as_ref()
    else {
        return Ok(None);
    };
    if outer_stride == c_in * s_in * extent(u)? {
        return Ok(Some(Datatype::vector(
            count * c_in,
            *blocklen,
            *s_in,
            u.clone(),
        )));
    }
    if let Datatype::HVector { stride_bytes, .. } = t {
        return Ok(hvector_to_vector(
            count,
            1,
            *stride_bytes,
            inner,
            extent(inner)?,
        ));
    }
    Ok(None)
}

fn hvector_to_vector(
    count: i64,
    blocklen: i64,
    stride_bytes: i64,
    inner: &Arc<Datatype>,
    ext: i64,
) -> Option<Datatype> {
    (ext > 0 && stride_bytes % ext == 0)
        .then(|| Datatype::vector(count, blocklen, stride_bytes / ext, inner.clone()))
}

fn struct_to_indexed(t: &Datatype) -> Result<Option<Datatype>> {
    let Datatype::Composite { members } = t else {
        return Ok(None);
    };
    let Some(first) = members.first() else {
        return Ok(None);
    };
    let u = &first.inner;
    if members.iter().any(|m| m.inner != *u) {
        return Ok(None);
    }
    let ext = extent(u)?;
    if ext <= 0 || members.iter().any(|m| m.displ_bytes % ext != 0) {
        return Ok(None);
    }
    let blocks: Vec<(i64, i64)> = members
        .iter()
        .map(|m| (m.count, m.displ_bytes / ext))
        .collect();
    Ok(Some(indexed_or_block(blocks, u.clone())))
}

fn indexed_or_block(blocks: Vec<(i64, i64)>, u: Arc<Datatype>) -> Datatype {
    match blocks.first() {
        Some(&(bl, _)) if blocks.iter().all(|b| b.0 == bl) => {
            Datatype::indexed_block(bl, blocks.into_iter().map(|b| b.1).collect(), u)
        }
        _ => Datatype::indexed(blocks, u),
    }
}

fn indexed_to_block(t: &Datatype) -> Result<Option<Datatype>> {
    let Datatype::Indexed { blocks, inner } = t else {
        return Ok(None);
    };
    Ok(match blocks.first() {
        Some(&(bl, _)) if blocks.iter().all(|b| b.0 == bl) => Some(Datatype::indexed_block(
            bl,
            blocks.iter().map(|b| b.1).collect(),
            inner.clone(),
        )),
        _ => None,
    })
}

/// `(blocklen, displacement)` pairs and the shared inner type.
type Blocks<'a> = (Vec<(i64, i64)>, &'a Arc<Datatype>);

fn index_blocks(t: &Datatype) -> Option<Blocks<'_>> {
    match t {
        Datatype::Indexed { blocks, inner } => Some((blocks.clone(), inner)),
        Datatype::IndexedBlock {
            blocklen,
            displs,
            inner,
        } => Some((displs.iter().map(|&d| (*blocklen, d)).collect(), inner)),
        _ => None,
    }
}

/// Smallest period `p` and displacement step of a fully periodic block list.
fn find_period(blocks: &[(i64, i64)]) -> Option<(usize, i64)> {
    let n = blocks.len();
    (1..=MAX_PERIOD.min(n / 2)).find_map(|p| {
        if !n.is_multiple_of(p) || (p == 1 && n < 3) {
            return None;
        }
        let step = blocks[p].1 - blocks[0].1;
        let periodic =
            (p..n).all(|i| blocks[i].0 == blocks[i - p].0 && blocks[i].1 - blocks[i - p].1 == step);
        periodic.then_some((p, step))
    })
}

/// Blocks written relative to their first displacement, as the most specific type.
fn periodic_type(blocks: &[(i64, i64)], u: &Arc<Datatype>) -> Result<Option<Datatype>> {
    let Some((p, step)) = find_period(blocks) else {
        return Ok(None);
    };
    let d0 = blocks[0].1;
    let periods = (blocks.len() / p) as i64;
    if p == 1 {
        return Ok(Some(Datatype::vector(
            periods,
            blocks[0].0,
            step,
            u.clone(),
        )));
    }
    let ext = extent(u)?;
    if step <= 0 || ext <= 0 {
        return Ok(None);
    }
    let group = indexed_or_block(
        blocks[..p].iter().map(|&(bl, d)| (bl, d - d0)).collect(),
        u.clone(),
    );
    let lb = attributes(&group)?.lb;
    let unit = Datatype::resized(lb, step * ext, group);
    Ok(Some(Datatype::contiguous(periods, unit)))
}

fn place(parts: Vec<(i64, Datatype)>, ext: i64) -> Datatype {
    if let [(0, only)] = parts.as_slice() {
        return only.clone();
    }
    Datatype::composite(
        parts
            .into_iter()
            .map(|(d, t)| Member::new(1, d * ext, t))
            .collect(),
    )
}

fn regular_stride(t: &Datatype) -> Result<Option<Datatype>> {
    let Some((blocks, u)) = index_blocks(t) else {
        return Ok(None);
    };
    let ext = extent(u)?;
    if blocks.is_empty() {
        return Ok(None);
    }
    if let Some(body) = periodic_type(&blocks, u)? {
        return Ok(Some(place(vec![(blocks[0].1, body)], ext)));
    }
    if ext <= 0 || blocks.len() < 4 {
        return Ok(None);
    }
    // One irregular block at either end of an otherwise constant-stride run.
    let single = |(bl, _): (i64, i64)| Datatype::contiguous(bl, u.clone());
    let n = blocks.len();
    if let Some(body) = periodic_type(&blocks[1..], u)? {
        return Ok(Some(place(
            vec![(blocks[0].1, single(blocks[0])), (blocks[1].1, body)],
            ext,
        )));
    }
    if let Some(body) = periodic_type(&blocks[..n - 1], u)? {
        return Ok(Some(place(
            vec![
                (blocks[0].1, body),
                (blocks[n - 1].1, single(blocks[n - 1])),
            ],
            ext,
        )));
    }
    Ok(None)
}

fn merge_adjacent(t: &Datatype) -> Result<Option<Datatype>> {
    if let Datatype::Composite { members } = t {
        return merge_members(members);
    }
    let Some((blocks, u)) = index_blocks(t) else {
        return Ok(None);
    };
    let mut merged: Vec<(i64, i64)> = Vec::with_capacity(blocks.len());
    for &(bl, d) in &blocks {
        if bl == 0 {
            continue;
        }
        match merged.last_mut() {
            Some(last) if last.1 + last.0 == d => last.0 += bl,
            _ => merged.push((bl, d)),
        }
    }
    if let [(bl, 0)] = merged.as_slice() {
        return Ok(Some(Datatype::contiguous(*bl, u.clone())));
    }
    if merged.len() == blocks.len() || merged.is_empty() {
        return Ok(None);
    }
    Ok(Some(indexed_or_block(merged, u.clone())))
}

fn merge_members(members: &[Member]) -> Result<Option<Datatype>> {
    let mut merged: Vec<Member> = Vec::with_capacity(members.len());
    for m in members {
        if m.count == 0 {
            continue;
        }
        if let Some(last) = merged.last_mut() {
            if last.inner == m.inner
                && last.displ_bytes + last.count * extent(&last.inner)? == m.displ_bytes
            {
                last.count += m.count;
                continue;
            }
        }
        merged.push(m.clone());
    }
    if let [only] = merged.as_slice() {
        if only.displ_bytes == 0 {
            return Ok(Some(Datatype::contiguous(only.count, only.inner.clone())));
        }
    }
    if merged.len() == members.len() || merged.is_empty() {
        return Ok(None);
    }
    Ok(Some(Datatype::composite(merged)))
}
