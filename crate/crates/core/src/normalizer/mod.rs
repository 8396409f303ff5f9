//! Type normalization: rewrite a datatype into a cheaper description of the same
//! layout, the way a commit step could.

mod cost;
mod passes;

use std::sync::Arc;

use serde::Serialize;

pub use cost::{cost, rank, rank_sum};

use crate::error::Result;
use crate::typecore::{attributes, Datatype, Member, TypeAttrs};
use cost::shape_key;
use passes::PASSES;

/// Bound on whole-tree rewrite rounds and on rewrites at a single node.
pub const MAX_ITERATIONS: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizationReport {
    pub input_cost: u64,
    pub output_cost: u64,
    pub passes_applied: Vec<String>,
    pub changed: bool,
}

/// Normalize `t`, returning the rewritten type and what was done to it.
pub fn normalize(t: &Datatype) -> Result<(Datatype, NormalizationReport)> {
    let input_cost = cost(t)?;
    let mut applied = Vec::new();
    let mut current = t.clone();
    for _ in 0..MAX_ITERATIONS {
        let next = rewrite(&current, &mut applied)?;
        if next == current {
            break;
        }
        current = next;
    }
    let report = NormalizationReport {
        input_cost,
        output_cost: cost(&current)?,
        changed: current != *t,
        passes_applied: applied,
    };
    Ok((current, report))
}

/// Normalized type only.
pub fn normal(t: &Datatype) -> Result<Datatype> {
    normalize(t).map(|(n, _)| n)
}

fn rewrite(t: &Datatype, applied: &mut Vec<String>) -> Result<Datatype> {
    let mut current = rewrite_children(t, applied)?;
    let attrs = attributes(&current)?;
    for _ in 0..MAX_ITERATIONS {
        let mut progressed = false;
        for (name, pass) in PASSES {
            let Some(candidate) = pass(&current)? else {
                continue;
            };
            let candidate = fix_extent(candidate, attrs)?;
            if shape_key(&candidate) < shape_key(&current) {
                applied.push(name.to_string());
                current = candidate;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    Ok(current)
}

fn rewrite_children(t: &Datatype, applied: &mut Vec<String>) -> Result<Datatype> {
    let mut go = |c: &Arc<Datatype>| -> Result<Arc<Datatype>> {
        let n = rewrite(c, applied)?;
        Ok(if n == **c { c.clone() } else { Arc::new(n) })
    };
    Ok(match t {
        Datatype::Base { .. } => t.clone(),
        Datatype::Contiguous { count, inner } => Datatype::contiguous(*count, go(inner)?),
        Datatype::Vector {
            count,
            blocklen,
            stride,
            inner,
        } => Datatype::vector(*count, *blocklen, *stride, go(inner)?),
        Datatype::HVector {
            count,
            blocklen,
            stride_bytes,
            inner,
        } => Datatype::hvector(*count, *blocklen, *stride_bytes, go(inner)?),
        Datatype::Indexed { blocks, inner } => Datatype::indexed(blocks.clone(), go(inner)?),
        Datatype::IndexedBlock {
            blocklen,
            displs,
            inner,
        } => Datatype::indexed_block(*blocklen, displs.clone(), go(inner)?),
        Datatype::Composite { members } => Datatype::composite(
            members
                .iter()
                .map(|m| Ok(Member::new(m.count, m.displ_bytes, go(&m.inner)?)))
                .collect::<Result<Vec<_>>>()?,
        ),
        Datatype::Resized { lb, extent, inner } => Datatype::resized(*lb, *extent, go(inner)?),
    })
}

/// Restore the original bounds so that repeated instances stay where they were.
fn fix_extent(candidate: Datatype, want: TypeAttrs) -> Result<Datatype> {
    let got = attributes(&candidate)?;
    if got.lb == want.lb && got.ub == want.ub {
        return Ok(candidate);
    }
    let inner = match candidate {
        Datatype::Resized { inner, .. } => inner,
        other => Arc::new(other),
    };
    Ok(Datatype::resized(want.lb, want.extent(), inner))
}
