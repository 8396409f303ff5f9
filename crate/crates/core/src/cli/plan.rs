//! Experiment registry: which layouts each experiment measures, with which
//! parameters, and which guideline comparisons it reports.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::bench::{run_interleaved, BenchCase, BenchRow, RunStats};
use crate::error::{Error, Result};
use crate::guidelines::{
    alt_description_cases, g1_case, g2_g3_case, g4_case, CheckOptions, GuidelineCase,
    GuidelineVerdict,
};
use crate::layouts::{block_elems, build, build_alternatives, LayoutId, LayoutSpec, Variant};
use crate::typecore::BaseKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    BasicLayouts,
    TiledHet,
    PackUnpack,
    Contig,
    TiledStruct,
    TiledVector,
    VectorTiled,
    BlockIndexed,
    AlternatingIndexed,
    AlternatingRepeated,
    Rowcol,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::BasicLayouts,
        ExperimentId::TiledHet,
        ExperimentId::PackUnpack,
        ExperimentId::Contig,
        ExperimentId::TiledStruct,
        ExperimentId::TiledVector,
        ExperimentId::VectorTiled,
        ExperimentId::BlockIndexed,
        ExperimentId::AlternatingIndexed,
        ExperimentId::AlternatingRepeated,
        ExperimentId::Rowcol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::BasicLayouts => "basic_layouts",
            ExperimentId::TiledHet => "tiled_het",
            ExperimentId::PackUnpack => "pack_unpack",
            ExperimentId::Contig => "contig",
            ExperimentId::TiledStruct => "tiled_struct",
            ExperimentId::TiledVector => "tiled_vector",
            ExperimentId::VectorTiled => "vector_tiled",
            ExperimentId::BlockIndexed => "block_indexed",
            ExperimentId::AlternatingIndexed => "alternating_indexed",
            ExperimentId::AlternatingRepeated => "alternating_repeated",
            ExperimentId::Rowcol => "rowcol",
        }
    }

    /// Every catalog layout the experiment measures.
    pub fn layouts(self) -> Vec<LayoutId> {
        use LayoutId::*;
        match self {
            ExperimentId::BasicLayouts => vec![Contiguous, Tiled, Block, Bucket, Alternating],
            ExperimentId::TiledHet => vec![Contiguous, TiledHet],
            ExperimentId::PackUnpack => LayoutId::BASIC.to_vec(),
            ExperimentId::Contig => {
                let mut v = LayoutId::BASIC.to_vec();
                v.push(ContigSubtype);
                v
            }
            ExperimentId::TiledStruct => vec![Tiled, TiledStruct],
            ExperimentId::TiledVector => vec![Tiled, TiledVector],
            ExperimentId::VectorTiled => vec![Tiled, VectorTiled],
            ExperimentId::BlockIndexed => vec![Block, BlockIndexed],
            ExperimentId::AlternatingIndexed => vec![Alternating, AlternatingIndexed],
            ExperimentId::AlternatingRepeated => vec![AlternatingRepeated, AlternatingStruct],
            ExperimentId::Rowcol => {
                vec![RowcolFullyIndexed, RowcolContigIndexed, RowcolStruct]
            }
        }
    }

    /// The family id whose alternative descriptions the experiment compares.
    fn family_id(self) -> Option<LayoutId> {
        match self {
            ExperimentId::TiledStruct => Some(LayoutId::TiledStruct),
            ExperimentId::TiledVector => Some(LayoutId::TiledVector),
            ExperimentId::VectorTiled => Some(LayoutId::VectorTiled),
            ExperimentId::BlockIndexed => Some(LayoutId::BlockIndexed),
            ExperimentId::AlternatingIndexed => Some(LayoutId::AlternatingIndexed),
            ExperimentId::AlternatingRepeated => Some(LayoutId::AlternatingRepeated),
            ExperimentId::Rowcol => Some(LayoutId::RowcolFullyIndexed),
            _ => None,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment `{s}`")))
    }
}

/// How message sizes are given: bytes of payload, or element counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sizes {
    Bytes(Vec<u64>),
    Elements(Vec<u64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentPlan {
    pub id: ExperimentId,
    pub a_values: Vec<u64>,
    pub sizes: Sizes,
    pub variants: Vec<Variant>,
    /// `(S1, S2)` pairs, used by `tiled_struct` only.
    pub repeats: Vec<(u64, u64)>,
}

const A_MAIN: [u64; 6] = [2, 10, 100, 1000, 1024, 10000];

impl ExperimentPlan {
    /// The parameter table of the experiment.
    pub fn default_for(id: ExperimentId) -> Self {
        let bytes = |v: &[u64]| Sizes::Bytes(v.to_vec());
        let (a_values, sizes) = match id {
            ExperimentId::BasicLayouts => (A_MAIN.to_vec(), bytes(&[3200, 2_560_000])),
            ExperimentId::TiledHet => (
                vec![2, 6, 8, 10, 16, 100, 128, 200],
                bytes(&[48_000, 1_500_000]),
            ),
            ExperimentId::PackUnpack => (vec![2, 10, 10000], bytes(&[64_000, 2_560_000])),
            ExperimentId::Contig
            | ExperimentId::TiledStruct
            | ExperimentId::TiledVector
            | ExperimentId::VectorTiled => (A_MAIN.to_vec(), bytes(&[2000, 2_560_000])),
            ExperimentId::BlockIndexed
            | ExperimentId::AlternatingIndexed
            | ExperimentId::AlternatingRepeated => (A_MAIN.to_vec(), bytes(&[3200, 2_560_000])),
            ExperimentId::Rowcol => (
                vec![2, 10, 100, 128, 512, 1000, 1024, 5000, 10000],
                Sizes::Elements(vec![100, 10240]),
            ),
        };
        let variants = match id {
            ExperimentId::BasicLayouts => vec![Variant::One, Variant::Two],
            _ => vec![Variant::One],
        };
        let repeats = match id {
            ExperimentId::TiledStruct => vec![(1, 1), (2, 3)],
            _ => Vec::new(),
        };
        ExperimentPlan {
            id,
            a_values,
            sizes,
            variants,
            repeats,
        }
    }

    fn base_specs(&self) -> Vec<(String, LayoutSpec)> {
        let mut out = Vec::new();
        let targets: Vec<LayoutId> = match self.id.family_id() {
            Some(f) => vec![f],
            None => self
                .id
                .layouts()
                .into_iter()
                .filter(|l| !matches!(l, LayoutId::Contiguous | LayoutId::ContigSubtype))
                .collect(),
        };
        let repeats = if self.repeats.is_empty() {
            vec![None]
        } else {
            self.repeats.iter().copied().map(Some).collect()
        };
        let (sizes, in_bytes) = match &self.sizes {
            Sizes::Bytes(v) => (v.clone(), true),
            Sizes::Elements(v) => (v.clone(), false),
        };
        for &variant in &self.variants {
            for &a in &self.a_values {
                for &size in &sizes {
                    for &rep in &repeats {
                        for &id in &targets {
                            let het = id == LayoutId::TiledHet;
                            let basetype = if het { BaseKind::Byte } else { BaseKind::Int };
                            let n = if in_bytes && !het { size / 4 } else { size };
                            let mut spec = LayoutSpec::new(id, n)
                                .with_a(a)
                                .with_variant(variant)
                                .with_basetype(basetype);
                            if let Some((s1, s2)) = rep {
                                spec = spec.with_repeats(s1, s2);
                            }
                            let label = match rep {
                                Some((s1, s2)) => format!("{id}/S={s1}+{s2}"),
                                None => id.to_string(),
                            };
                            let unit = if in_bytes { "m" } else { "n" };
                            let v = if self.variants.len() > 1 {
                                format!("v{variant}/")
                            } else {
                                String::new()
                            };
                            out.push((format!("{}/{label}/{v}A={a}/{unit}={size}", self.id), spec));
                        }
                    }
                }
            }
        }
        out
    }

    /// Every measured comparison of the experiment, plus the bench-only cases.
    /// Parameter points the size cannot accommodate are returned as skipped.
    pub fn cases(&self, opts: &CheckOptions) -> Result<PlannedCases> {
        let mut planned = PlannedCases::default();
        for (stem, spec) in self.base_specs() {
            let Some(spec) = fit(spec) else {
                planned.skipped.push(stem);
                continue;
            };
            match self.id {
                ExperimentId::BasicLayouts | ExperimentId::TiledHet => {
                    let b = build(&spec)?;
                    planned.guidelines.push(g4_case(
                        &stem,
                        b.datatype.clone(),
                        b.count,
                        Some(&spec),
                        opts,
                    )?);
                    planned.bench.push(reference_case(&stem, &b, opts)?);
                }
                ExperimentId::PackUnpack => {
                    let b = build(&spec)?;
                    planned.guidelines.push(g2_g3_case(
                        &stem,
                        b.datatype,
                        b.count,
                        Some(&spec),
                        opts,
                    ));
                }
                ExperimentId::Contig => {
                    let b = build(&spec)?;
                    planned
                        .guidelines
                        .push(g1_case(&stem, b.datatype, b.count, Some(&spec), opts));
                }
                _ => {
                    let family = build_alternatives(&spec)?;
                    planned
                        .guidelines
                        .extend(alt_description_cases(&stem, &family, opts));
                    // The reference of most families is a basic layout, whose own
                    // normalization belongs to the basic experiment.
                    let skip_reference = self.id != ExperimentId::Rowcol;
                    for b in family.iter().skip(usize::from(skip_reference)) {
                        let id = format!("{stem}/{}", b.id);
                        planned.guidelines.push(g4_case(
                            &id,
                            b.datatype.clone(),
                            b.count,
                            Some(&b.spec),
                            opts,
                        )?);
                    }
                }
            }
        }
        let mut ids = std::collections::HashSet::new();
        planned.bench.retain(|c| ids.insert(c.case_id.clone()));
        Ok(planned)
    }
}

/// Round `n` down to a multiple of the block element count; `None` if nothing is left
/// or the layout cannot be built at that size.
fn fit(mut spec: LayoutSpec) -> Option<LayoutSpec> {
    if matches!(
        spec.id,
        LayoutId::RowcolFullyIndexed | LayoutId::RowcolContigIndexed | LayoutId::RowcolStruct
    ) {
        return (spec.n >= spec.a.unwrap_or(0)).then_some(spec);
    }
    let k = block_elems(&spec).ok()?;
    spec.n = spec.n / k * k;
    (spec.n > 0 && build_alternatives_or_build(&spec)).then_some(spec)
}

fn build_alternatives_or_build(spec: &LayoutSpec) -> bool {
    match spec.id.family() {
        Some(_) => build_alternatives(spec).is_ok(),
        None => build(spec).is_ok(),
    }
}

/// Contiguous buffer with the same payload as `b`.
fn reference_case(
    stem: &str,
    b: &crate::layouts::BuiltLayout,
    opts: &CheckOptions,
) -> Result<BenchCase> {
    let payload = b.payload_bytes()?;
    let basetype = b.spec.basetype;
    let n = payload / basetype.size();
    let spec = LayoutSpec::new(LayoutId::Contiguous, n).with_basetype(basetype);
    let reference = build(&spec)?;
    // The contiguous reference does not depend on A or the layout.
    let exp = stem.split('/').next().unwrap_or(stem);
    let size = stem.rsplit('/').next().unwrap_or("");
    let id = format!("{exp}/contiguous/{size}/n={n}");
    Ok(BenchCase::new(id, reference.datatype, reference.count)
        .with_spec(spec)
        .with_engine(opts.engine)
        .with_transport(opts.transport)
        .with_runs(opts.r)
        .with_nrep(opts.nrep))
}

#[derive(Clone, Debug, Default)]
pub struct PlannedCases {
    pub guidelines: Vec<GuidelineCase>,
    pub bench: Vec<BenchCase>,
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<BenchRow>,
    pub stats: Vec<RunStats>,
    pub verdicts: Vec<GuidelineVerdict>,
    pub skipped: Vec<String>,
}

impl ExperimentOutput {
    pub fn violations(&self) -> usize {
        self.verdicts.iter().filter(|v| v.violated).count()
    }

    pub fn extend(&mut self, other: ExperimentOutput) {
        self.rows.extend(other.rows);
        self.stats.extend(other.stats);
        self.verdicts.extend(other.verdicts);
        self.skipped.extend(other.skipped);
    }
}

/// Run every case of `plan` sequentially.
pub fn run_plan(plan: &ExperimentPlan, opts: &CheckOptions) -> Result<ExperimentOutput> {
    let planned = plan.cases(opts)?;
    let mut out = ExperimentOutput {
        skipped: planned.skipped,
        ..Default::default()
    };
    let mut seen = std::collections::HashSet::new();
    let mut record =
        |out: &mut ExperimentOutput, case: &BenchCase, stats: &RunStats| -> Result<()> {
            if seen.insert(case.case_id.clone()) {
                out.rows.push(BenchRow::new(case, stats)?);
                out.stats.push(stats.clone());
            }
            Ok(())
        };
    for case in planned.guidelines {
        let v = case.run(opts)?;
        record(&mut out, &v.case.lhs, &v.lhs_stats)?;
        record(&mut out, &v.case.rhs, &v.rhs_stats)?;
        out.verdicts.push(v);
    }
    for case in planned.bench {
        let stats = run_interleaved(
            std::slice::from_ref(&case),
            &opts.clock,
            opts.seed,
            opts.keep_raw,
        )?
        .remove(0);
        record(&mut out, &case, &stats)?;
    }
    Ok(out)
}

/// Layout ids the registry uses, for cross-checking against the catalog.
pub fn registry_layouts() -> Vec<(ExperimentId, Vec<LayoutId>)> {
    ExperimentId::ALL
        .iter()
        .map(|&e| (e, e.layouts()))
        .collect()
}
