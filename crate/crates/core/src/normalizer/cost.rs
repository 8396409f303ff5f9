use crate::error::Result;
use crate::typecore::{flatten, Datatype};

/// Constructor order used to break ties: more specific constructors rank lower.
pub fn rank(t: &Datatype) -> u64 {
    match t {
        Datatype::Base { .. } => 0,
        Datatype::Contiguous { .. } | Datatype::Resized { .. } => 1,
        Datatype::Vector { .. } => 2,
        Datatype::HVector { .. } => 3,
        Datatype::IndexedBlock { .. } => 4,
        Datatype::Indexed { .. } => 5,
        Datatype::Composite { .. } => 6,
    }
}

pub fn rank_sum(t: &Datatype) -> u64 {
    rank(t) + t.children().into_iter().map(|c| rank_sum(c)).sum::<u64>()
}

/// Canonical segments of one instance plus tree nodes (list entries count as nodes).
pub fn cost(t: &Datatype) -> Result<u64> {
    Ok(flatten(t, 1)?.segments.len() as u64 + t.node_count())
}

/// Ordering key for rewrites that preserve the layout, so the segment term is equal
/// on both sides and only the tree shape decides.
pub(crate) fn shape_key(t: &Datatype) -> (u64, u64) {
    (t.node_count(), rank_sum(t))
}
