//! Derived-datatype layouts, pack engines, normalization and a ping-pong benchmark
//! harness for checking self-consistent performance guidelines.

pub mod bench;
pub mod cli;
pub mod clock;
pub mod error;
pub mod guidelines;
pub mod layouts;
pub mod normalizer;
pub mod packer;
pub mod par;
pub mod transport;
pub mod typecore;

pub use error::{Error, Result};
