//! The datatype model: constructor trees, bounds arithmetic, flattening and
//! layout equivalence.

mod base;
mod commit;
mod datatype;
mod flat;

pub use base::BaseKind;
pub use commit::{attributes, commit, commit_arc, equivalent, flatten, CommittedType, TypeAttrs};
pub(crate) use commit::{Node, Shape};
pub use datatype::{Datatype, Member};
pub use flat::{canonicalize, FlatLayout, Segment};
