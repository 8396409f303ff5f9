//! Pack engines: serialize the typed bytes of a region into a contiguous buffer and
//! scatter them back.

mod compiled;
mod interp;
mod parallel;
mod region;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use compiled::{compile, pack_compiled, PackProgram};
pub use interp::{pack, pack_into, unpack, BYTE_LOOP_LIMIT};
pub use parallel::{pack_compiled_par, pack_compiled_par_into};
pub use region::region_len;

use crate::error::{Error, Result};
use crate::typecore::CommittedType;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Interpreted,
    #[default]
    Compiled,
}

impl Engine {
    pub const ALL: [Engine; 2] = [Engine::Interpreted, Engine::Compiled];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Interpreted => "interpreted",
            Engine::Compiled => "compiled",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "interpreted" | "interp" => Ok(Engine::Interpreted),
            "compiled" => Ok(Engine::Compiled),
            other => Err(Error::InvalidArgument(format!("unknown engine '{other}'"))),
        }
    }
}

/// A type and count prepared for repeated packing with one engine.
///
/// Compilation happens here, outside any timed region.
#[derive(Clone, Debug)]
pub struct Packer {
    ty: Arc<CommittedType>,
    count: u64,
    engine: Engine,
    program: Option<PackProgram>,
    region_len: usize,
}

impl Packer {
    pub fn new(ty: Arc<CommittedType>, count: u64, engine: Engine) -> Result<Self> {
        let region_len = region_len(&ty, count)?;
        let program = match engine {
            Engine::Compiled => Some(compile(&ty, count)?),
            Engine::Interpreted => None,
        };
        Ok(Packer {
            ty,
            count,
            engine,
            program,
            region_len,
        })
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn committed(&self) -> &Arc<CommittedType> {
        &self.ty
    }

    pub fn packed_len(&self) -> usize {
        (self.ty.size() * self.count) as usize
    }

    pub fn region_len(&self) -> usize {
        self.region_len
    }

    pub fn program(&self) -> Option<&PackProgram> {
        self.program.as_ref()
    }

    pub fn pack_into(&self, src: &[u8], dst: &mut [u8]) -> Result<()> {
        match &self.program {
            Some(p) => p.pack_into(src, dst),
            None => pack_into(&self.ty, self.count, src, dst),
        }
    }

    pub fn pack(&self, src: &[u8]) -> Result<Vec<u8>> {
        let mut out = vec![0; self.packed_len()];
        self.pack_into(src, &mut out)?;
        Ok(out)
    }

    pub fn unpack(&self, packed: &[u8], dst: &mut [u8]) -> Result<()> {
        match &self.program {
            Some(p) => p.unpack(packed, dst),
            None => unpack(&self.ty, self.count, packed, dst),
        }
    }
}
