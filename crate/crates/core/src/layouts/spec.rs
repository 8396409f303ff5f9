use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::typecore::BaseKind;

/// Catalog identifiers. JSON uses the lowercase names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutId {
    Contiguous,
    Tiled,
    Block,
    Bucket,
    Alternating,
    TiledHet,
    ContigSubtype,
    TiledStruct,
    TiledVector,
    VectorTiled,
    BlockIndexed,
    AlternatingIndexed,
    AlternatingRepeated,
    AlternatingStruct,
    RowcolFullyIndexed,
    RowcolContigIndexed,
    RowcolStruct,
}

impl LayoutId {
    pub const ALL: [LayoutId; 17] = [
        LayoutId::Contiguous,
        LayoutId::Tiled,
        LayoutId::Block,
        LayoutId::Bucket,
        LayoutId::Alternating,
        LayoutId::TiledHet,
        LayoutId::ContigSubtype,
        LayoutId::TiledStruct,
        LayoutId::TiledVector,
        LayoutId::VectorTiled,
        LayoutId::BlockIndexed,
        LayoutId::AlternatingIndexed,
        LayoutId::AlternatingRepeated,
        LayoutId::AlternatingStruct,
        LayoutId::RowcolFullyIndexed,
        LayoutId::RowcolContigIndexed,
        LayoutId::RowcolStruct,
    ];

    /// The four strided layouts every other experiment builds on.
    pub const BASIC: [LayoutId; 4] = [
        LayoutId::Tiled,
        LayoutId::Block,
        LayoutId::Bucket,
        LayoutId::Alternating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayoutId::Contiguous => "contiguous",
            LayoutId::Tiled => "tiled",
            LayoutId::Block => "block",
            LayoutId::Bucket => "bucket",
            LayoutId::Alternating => "alternating",
            LayoutId::TiledHet => "tiled_het",
            LayoutId::ContigSubtype => "contig_subtype",
            LayoutId::TiledStruct => "tiled_struct",
            LayoutId::TiledVector => "tiled_vector",
            LayoutId::VectorTiled => "vector_tiled",
            LayoutId::BlockIndexed => "block_indexed",
            LayoutId::AlternatingIndexed => "alternating_indexed",
            LayoutId::AlternatingRepeated => "alternating_repeated",
            LayoutId::AlternatingStruct => "alternating_struct",
            LayoutId::RowcolFullyIndexed => "rowcol_fully_indexed",
            LayoutId::RowcolContigIndexed => "rowcol_contig_indexed",
            LayoutId::RowcolStruct => "rowcol_struct",
        }
    }

    /// The ordered descriptions compared for this id, reference first.
    /// `None` for ids that have no alternative-description family.
    pub fn family(self) -> Option<Vec<LayoutId>> {
        use LayoutId::*;
        Some(match self {
            ContigSubtype => vec![ContigSubtype],
            TiledStruct => vec![Tiled, TiledStruct],
            TiledVector => vec![Tiled, TiledVector],
            VectorTiled => vec![Tiled, VectorTiled],
            BlockIndexed => vec![Block, BlockIndexed],
            AlternatingIndexed => vec![Alternating, AlternatingIndexed],
            AlternatingRepeated | AlternatingStruct => {
                vec![AlternatingRepeated, AlternatingStruct]
            }
            RowcolFullyIndexed | RowcolContigIndexed | RowcolStruct => {
                vec![RowcolFullyIndexed, RowcolContigIndexed, RowcolStruct]
            }
            Contiguous | Tiled | Block | Bucket | Alternating | TiledHet => return None,
        })
    }
}

impl fmt::Display for LayoutId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LayoutId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown layout id `{s}`")))
    }
}

/// Parameterization of the basic layouts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "VariantRepr", into = "VariantRepr")]
pub enum Variant {
    #[default]
    One,
    Two,
    /// All parameters given explicitly.
    Explicit,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum VariantRepr {
    Number(u8),
    Name(String),
}

impl TryFrom<VariantRepr> for Variant {
    type Error = String;

    fn try_from(r: VariantRepr) -> std::result::Result<Self, String> {
        match r {
            VariantRepr::Number(1) => Ok(Variant::One),
            VariantRepr::Number(2) => Ok(Variant::Two),
            VariantRepr::Name(s) => s.parse().map_err(|e: Error| e.to_string()),
            VariantRepr::Number(n) => Err(format!("unknown variant {n}")),
        }
    }
}

impl From<Variant> for VariantRepr {
    fn from(v: Variant) -> Self {
        match v {
            Variant::One => VariantRepr::Number(1),
            Variant::Two => VariantRepr::Number(2),
            Variant::Explicit => VariantRepr::Name("explicit".into()),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "one" => Ok(Variant::One),
            "2" | "two" => Ok(Variant::Two),
            "explicit" => Ok(Variant::Explicit),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}`"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::One => "1",
            Variant::Two => "2",
            Variant::Explicit => "explicit",
        })
    }
}

/// One experiment configuration: catalog id plus its parameters.
///
/// Counts and strides are in elements of `basetype`. For `tiled_het`, `n` is the
/// payload in bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub id: LayoutId,
    #[serde(default = "default_basetype")]
    pub basetype: BaseKind,
    pub n: u64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(
        rename = "A",
        alias = "a",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub a: Option<u64>,
    #[serde(
        rename = "B",
        alias = "b",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub b: Option<u64>,
    #[serde(
        rename = "A1",
        alias = "a1",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub a1: Option<u64>,
    #[serde(
        rename = "A2",
        alias = "a2",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub a2: Option<u64>,
    #[serde(
        rename = "B1",
        alias = "b1",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub b1: Option<u64>,
    #[serde(
        rename = "B2",
        alias = "b2",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub b2: Option<u64>,
    /// First repetition count for `tiled_struct`; the block repetition `S` for `vector_tiled`.
    #[serde(
        rename = "S1",
        alias = "s1",
        alias = "S",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub s1: Option<u64>,
    #[serde(
        rename = "S2",
        alias = "s2",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub s2: Option<u64>,
    /// Basic layout wrapped by `contig_subtype`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<LayoutId>,
    /// Member base types for `tiled_het`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<BaseKind>>,
}

fn default_basetype() -> BaseKind {
    BaseKind::Int
}

impl LayoutSpec {
    pub fn new(id: LayoutId, n: u64) -> Self {
        LayoutSpec {
            id,
            basetype: BaseKind::Int,
            n,
            variant: Variant::One,
            a: None,
            b: None,
            a1: None,
            a2: None,
            b1: None,
            b2: None,
            s1: None,
            s2: None,
            subtype: None,
            kinds: None,
        }
    }

    pub fn with_a(mut self, a: u64) -> Self {
        self.a = Some(a);
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_basetype(mut self, basetype: BaseKind) -> Self {
        self.basetype = basetype;
        self
    }

    pub fn with_repeats(mut self, s1: u64, s2: u64) -> Self {
        self.s1 = Some(s1);
        self.s2 = Some(s2);
        self
    }

    pub fn with_subtype(mut self, subtype: LayoutId) -> Self {
        self.subtype = Some(subtype);
        self
    }

    /// Same parameters, different id.
    pub fn retarget(&self, id: LayoutId) -> Self {
        LayoutSpec { id, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout spec serializes")
    }

    /// Resolve the unit sizes and strides for this spec's variant.
    pub fn params(&self) -> Result<Params> {
        let a = self.a;
        let derived = match self.variant {
            Variant::Explicit => None,
            Variant::One => {
                let a = a.ok_or_else(|| Error::BadParams("variant 1 requires A".into()))?;
                Some(Params {
                    a,
                    b: a + 2,
                    a1: a.saturating_sub(1),
                    a2: a + 1,
                    b1: a + 1,
                    b2: a + 3,
                })
            }
            Variant::Two => {
                let a = a.ok_or_else(|| Error::BadParams("variant 2 requires A".into()))?;
                if a % 2 != 0 {
                    return Err(Error::BadParams(format!(
                        "variant 2 requires even A (A1 = A/2), got A={a}"
                    )));
                }
                Some(Params {
                    a,
                    b: 3 * a,
                    a1: a / 2,
                    a2: 3 * a / 2,
                    b1: 2 * a,
                    b2: 4 * a,
                })
            }
        };
        let Some(d) = derived else {
            let need = |v: Option<u64>, name: &str| {
                v.ok_or_else(|| Error::BadParams(format!("explicit variant requires {name}")))
            };
            // Only the parameters the id actually uses are mandatory.
            let uses = self.uses();
            let get = |v: Option<u64>, name: &str, used: bool| {
                if used {
                    need(v, name)
                } else {
                    Ok(v.unwrap_or(0))
                }
            };
            return Ok(Params {
                a: get(a, "A", uses.a)?,
                b: get(self.b, "B", uses.b)?,
                a1: get(self.a1, "A1", uses.a12)?,
                a2: get(self.a2, "A2", uses.a12)?,
                b1: get(self.b1, "B1", uses.b1)?,
                b2: get(self.b2, "B2", uses.b2)?,
            });
        };
        let check = |given: Option<u64>, value: u64, name: &str| match given {
            Some(g) if g != value => Err(Error::BadParams(format!(
                "{name}={g} conflicts with variant {} ({name}={value})",
                self.variant
            ))),
            _ => Ok(()),
        };
        check(self.b, d.b, "B")?;
        check(self.a1, d.a1, "A1")?;
        check(self.a2, d.a2, "A2")?;
        check(self.b1, d.b1, "B1")?;
        check(self.b2, d.b2, "B2")?;
        Ok(d)
    }

    fn uses(&self) -> Uses {
        let id = match self.id {
            LayoutId::ContigSubtype => self.subtype.unwrap_or(LayoutId::Tiled),
            id => id,
        };
        use LayoutId::*;
        match id {
            Contiguous => Uses::default(),
            Tiled | TiledStruct | TiledVector | VectorTiled | TiledHet => Uses {
                a: true,
                b: true,
                ..Uses::default()
            },
            Block | BlockIndexed => Uses {
                a: true,
                b1: true,
                b2: true,
                ..Uses::default()
            },
            Bucket => Uses {
                b: true,
                a12: true,
                ..Uses::default()
            },
            Alternating | AlternatingIndexed => Uses {
                a12: true,
                b1: true,
                b2: true,
                ..Uses::default()
            },
            AlternatingRepeated | AlternatingStruct => Uses {
                a12: true,
                b1: true,
                ..Uses::default()
            },
            RowcolFullyIndexed | RowcolContigIndexed | RowcolStruct => Uses {
                a: true,
                ..Uses::default()
            },
            ContigSubtype => unreachable!("resolved above"),
        }
    }
}

#[derive(Default)]
struct Uses {
    a: bool,
    b: bool,
    a12: bool,
    b1: bool,
    b2: bool,
}

/// Resolved unit sizes and strides, in elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    pub a: u64,
    pub b: u64,
    pub a1: u64,
    pub a2: u64,
    pub b1: u64,
    pub b2: u64,
}
