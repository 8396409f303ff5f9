use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use super::verdict::{judge, GuidelineId, Relation, DEFAULT_THRESHOLD};
use crate::bench::{run_interleaved, BenchCase, RunStats, DEFAULT_RUNS};
use crate::clock::ClockSource;
use crate::error::{Error, Result};
use crate::layouts::{BuiltLayout, LayoutSpec};
use crate::normalizer::normal;
use crate::packer::Engine;
use crate::transport::{Method, TransportKind};
use crate::typecore::{equivalent, Datatype};

/// Measurement settings shared by every guideline check.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub transport: TransportKind,
    pub engine: Engine,
    /// Per-side overrides of `engine`.
    pub lhs_engine: Option<Engine>,
    pub rhs_engine: Option<Engine>,
    pub r: usize,
    pub nrep: Option<usize>,
    pub threshold: f64,
    pub clock: ClockSource,
    pub seed: u64,
    pub keep_raw: bool,
    /// Re-measurements a violation must survive before it is reported.
    pub confirmations: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            transport: TransportKind::Inmem,
            engine: Engine::Compiled,
            lhs_engine: None,
            rhs_engine: None,
            r: DEFAULT_RUNS,
            nrep: None,
            threshold: DEFAULT_THRESHOLD,
            clock: ClockSource::Monotonic,
            seed: 1,
            keep_raw: false,
            confirmations: 1,
        }
    }
}

impl CheckOptions {
    fn case(&self, id: String, t: Arc<Datatype>, count: u64, lhs: bool) -> BenchCase {
        let engine = if lhs {
            self.lhs_engine
        } else {
            self.rhs_engine
        }
        .unwrap_or(self.engine);
        BenchCase::new(id, t, count)
            .with_engine(engine)
            .with_transport(self.transport)
            .with_runs(self.r)
            .with_nrep(self.nrep)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GuidelineCase {
    pub guideline: GuidelineId,
    pub case_id: String,
    pub lhs: BenchCase,
    pub rhs: BenchCase,
    pub relation: Relation,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GuidelineVerdict {
    pub case: GuidelineCase,
    pub lhs_stats: RunStats,
    pub rhs_stats: RunStats,
    pub ratio: f64,
    pub violated: bool,
    pub severity: f64,
    /// Measurements taken, including confirmations.
    pub attempts: usize,
}

impl GuidelineVerdict {
    pub fn from_stats(case: GuidelineCase, lhs_stats: RunStats, rhs_stats: RunStats) -> Self {
        let j = judge(
            lhs_stats.mean_of_medians,
            rhs_stats.mean_of_medians,
            case.relation,
            case.threshold,
        );
        GuidelineVerdict {
            case,
            lhs_stats,
            rhs_stats,
            ratio: j.ratio,
            violated: j.violated,
            severity: j.severity,
            attempts: 1,
        }
    }
}

impl GuidelineCase {
    /// Refuse to compare different layouts.
    pub fn check_layouts(&self) -> Result<()> {
        let (l, r) = (&self.lhs, &self.rhs);
        if equivalent(&l.datatype, l.count, &r.datatype, r.count)? {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!(
                "{}: {} x{} vs {} x{}",
                self.case_id, l.datatype, l.count, r.datatype, r.count
            )))
        }
    }

    /// Measure both sides run-interleaved and judge them. Two sides that are the
    /// same measurement (same tree, count, method, engine and transport) are
    /// measured once. A violation is re-measured with fresh runs up to
    /// `opts.confirmations` times and only reported if every measurement violates.
    pub fn run(self, opts: &CheckOptions) -> Result<GuidelineVerdict> {
        self.check_layouts()?;
        let retries = if opts.clock.is_synthetic() {
            0
        } else {
            opts.confirmations
        };
        let mut attempt = 0;
        loop {
            let mut v = self.clone().measure(opts, opts.seed + attempt as u64)?;
            attempt += 1;
            v.attempts = attempt;
            if !v.violated || attempt > retries {
                return Ok(v);
            }
        }
    }

    fn measure(self, opts: &CheckOptions, seed: u64) -> Result<GuidelineVerdict> {
        if same_measurement(&self.lhs, &self.rhs) {
            let mut stats = run_interleaved(
                std::slice::from_ref(&self.lhs),
                &opts.clock,
                seed,
                opts.keep_raw,
            )?;
            let lhs = stats.pop().expect("one stat");
            let mut rhs = lhs.clone();
            rhs.case_id = self.rhs.case_id.clone();
            return Ok(GuidelineVerdict::from_stats(self, lhs, rhs));
        }
        let mut stats = run_interleaved(
            &[self.lhs.clone(), self.rhs.clone()],
            &opts.clock,
            seed,
            opts.keep_raw,
        )?;
        let rhs = stats.pop().expect("two stats");
        let lhs = stats.pop().expect("two stats");
        Ok(GuidelineVerdict::from_stats(self, lhs, rhs))
    }
}

pub fn same_measurement(a: &BenchCase, b: &BenchCase) -> bool {
    a.datatype == b.datatype
        && a.count == b.count
        && a.method == b.method
        && a.engine == b.engine
        && a.transport == b.transport
}

fn attach(mut case: BenchCase, spec: Option<&LayoutSpec>) -> BenchCase {
    case.spec = spec.cloned();
    case
}

/// `(t, c)` against `(Contiguous(c, t), 1)`, both typed.
pub fn g1_case(
    case_id: &str,
    t: Arc<Datatype>,
    c: u64,
    spec: Option<&LayoutSpec>,
    opts: &CheckOptions,
) -> GuidelineCase {
    let contig = Arc::new(Datatype::contiguous(c as i64, t.clone()));
    GuidelineCase {
        guideline: GuidelineId::G1Contig,
        case_id: case_id.to_string(),
        lhs: attach(opts.case(format!("{case_id}/count"), t, c, true), spec),
        rhs: attach(
            opts.case(format!("{case_id}/contig"), contig, 1, false),
            spec,
        ),
        relation: Relation::Similar,
        threshold: opts.threshold,
    }
}

pub fn check_g1(
    case_id: &str,
    t: Arc<Datatype>,
    c: u64,
    spec: Option<&LayoutSpec>,
    opts: &CheckOptions,
) -> Result<GuidelineVerdict> {
    g1_case(case_id, t, c, spec, opts).run(opts)
}

/// Typed round trip against explicit pack, byte send, receive and unpack. One
/// round trip holds both the send-side and the receive-side composition.
pub fn g2_g3_case(
    case_id: &str,
    t: Arc<Datatype>,
    c: u64,
    spec: Option<&LayoutSpec>,
    opts: &CheckOptions,
) -> GuidelineCase {
    GuidelineCase {
        guideline: GuidelineId::G2PackSend,
        case_id: case_id.to_string(),
        lhs: attach(
            opts.case(format!("{case_id}/typed"), t.clone(), c, true),
            spec,
        ),
        rhs: attach(
            opts.case(format!("{case_id}/packed"), t, c, false)
                .with_method(Method::Packed),
            spec,
        ),
        relation: Relation::NoSlower,
        threshold: opts.threshold,
    }
}

pub fn check_g2_g3(
    case_id: &str,
    t: Arc<Datatype>,
    c: u64,
    spec: Option<&LayoutSpec>,
    opts: &CheckOptions,
) -> Result<GuidelineVerdict> {
    g2_g3_case(case_id, t, c, spec, opts).run(opts)
}

/// `t` as given against its normalized description.
pub fn g4_case(
    case_id: &str,
    t: Arc<Datatype>,
    c: u64,
    spec: Option<&LayoutSpec>,
    opts: &CheckOptions,
) -> Result<GuidelineCase> {
    let n = normal(&t)?;
    let n = if n == *t { t.clone() } else { Arc::new(n) };
    Ok(GuidelineCase {
        guideline: GuidelineId::G4Normalize,
        case_id: case_id.to_string(),
        lhs: attach(opts.case(format!("{case_id}/given"), t, c, true), spec),
        rhs: attach(opts.case(format!("{case_id}/normal"), n, c, false), spec),
        relation: Relation::NoSlower,
        threshold: opts.threshold,
    })
}

pub fn check_g4(
    case_id: &str,
    t: Arc<Datatype>,
    c: u64,
    spec: Option<&LayoutSpec>,
    opts: &CheckOptions,
) -> Result<GuidelineVerdict> {
    g4_case(case_id, t, c, spec, opts)?.run(opts)
}

/// Each compared description (left) against the family's reference (right).
pub fn alt_description_cases(
    case_id: &str,
    family: &[BuiltLayout],
    opts: &CheckOptions,
) -> Vec<GuidelineCase> {
    let Some((reference, compared)) = family.split_first() else {
        return Vec::new();
    };
    compared
        .iter()
        .map(|b| {
            let id = format!("{case_id}/{}_vs_{}", b.id, reference.id);
            GuidelineCase {
                guideline: GuidelineId::G4AltDescription,
                case_id: id.clone(),
                lhs: attach(
                    opts.case(format!("{id}/{}", b.id), b.datatype.clone(), b.count, true),
                    Some(&b.spec),
                ),
                rhs: attach(
                    opts.case(
                        format!("{id}/{}", reference.id),
                        reference.datatype.clone(),
                        reference.count,
                        false,
                    ),
                    Some(&reference.spec),
                ),
                relation: Relation::NoSlower,
                threshold: opts.threshold,
            }
        })
        .collect()
}

pub fn check_alternatives(
    case_id: &str,
    family: &[BuiltLayout],
    opts: &CheckOptions,
) -> Result<Vec<GuidelineVerdict>> {
    alt_description_cases(case_id, family, opts)
        .into_iter()
        .map(|c| c.run(opts))
        .collect()
}

/// `guideline,case_id,lhs,rhs,ratio,threshold,violated,severity`
pub fn write_verdict_csv<W: Write>(out: W, verdicts: &[GuidelineVerdict]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "guideline",
        "case_id",
        "lhs",
        "rhs",
        "ratio",
        "threshold",
        "violated",
        "severity",
    ])?;
    for v in verdicts {
        w.write_record([
            v.case.guideline.name().to_string(),
            v.case.case_id.clone(),
            v.case.lhs.case_id.clone(),
            v.case.rhs.case_id.clone(),
            format!("{:.6}", v.ratio),
            format!("{:.2}", v.case.threshold),
            v.violated.to_string(),
            format!("{:.6}", v.severity),
        ])?;
    }
    w.flush()?;
    Ok(())
}
