//! Parametric catalog of the strided layouts and their alternative descriptions.

mod build;
mod spec;

pub use build::{
    block_elems, build, build_alternatives, default_vector_repeat, make_tiled_heterogeneous,
    make_tiled_heterogeneous_strided, BuiltLayout, DEFAULT_HET_KINDS,
};
pub use spec::{LayoutId, LayoutSpec, Params, Variant};
