use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::stats::{nrep_schedule, RunStats};
use crate::clock::ClockSource;
use crate::error::{Error, Result};
use crate::layouts::LayoutSpec;
use crate::packer::{Engine, Packer};
use crate::transport::{run_session, Method, SessionConfig, TransportKind};
use crate::typecore::{commit_arc, Datatype};

/// Untimed round trips at the start of every run.
pub const WARMUPS: usize = 3;
pub const DEFAULT_RUNS: usize = 5;

/// One measured configuration: a description, how it is sent, and over what.
#[derive(Clone, Debug, Serialize)]
pub struct BenchCase {
    pub case_id: String,
    /// Catalog parameters the description came from, if any.
    pub spec: Option<LayoutSpec>,
    pub datatype: Arc<Datatype>,
    pub count: u64,
    pub method: Method,
    pub engine: Engine,
    pub transport: TransportKind,
    pub r: usize,
    pub nrep_override: Option<usize>,
}

impl BenchCase {
    pub fn new(case_id: impl Into<String>, datatype: Arc<Datatype>, count: u64) -> Self {
        BenchCase {
            case_id: case_id.into(),
            spec: None,
            datatype,
            count,
            method: Method::Typed,
            engine: Engine::Compiled,
            transport: TransportKind::Inmem,
            r: DEFAULT_RUNS,
            nrep_override: None,
        }
    }

    pub fn with_spec(mut self, spec: LayoutSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_transport(mut self, transport: TransportKind) -> Self {
        self.transport = transport;
        self
    }

    pub fn with_runs(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn with_nrep(mut self, nrep: Option<usize>) -> Self {
        self.nrep_override = nrep;
        self
    }
}

/// A case with its type committed, its engine prepared and its region filled.
pub struct PreparedCase {
    pub case: BenchCase,
    packer: Arc<Packer>,
    region: Vec<u8>,
    pub m_bytes: u64,
    pub nrep: usize,
}

impl PreparedCase {
    pub fn new(case: BenchCase, seed: u64) -> Result<Self> {
        let ctx = case.case_id.clone();
        Self::build(case, seed).map_err(|e| e.with_context(ctx))
    }

    fn build(case: BenchCase, seed: u64) -> Result<Self> {
        if case.r == 0 {
            return Err(Error::InvalidArgument("r must be at least 1".into()));
        }
        let committed = Arc::new(commit_arc(case.datatype.clone())?);
        let packer = Arc::new(Packer::new(committed, case.count, case.engine)?);
        let mut region = vec![0; packer.region_len()];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut region);
        let m_bytes = packer.packed_len() as u64;
        let nrep = case.nrep_override.unwrap_or_else(|| nrep_schedule(m_bytes));
        if nrep == 0 {
            return Err(Error::InvalidArgument("nrep must be at least 1".into()));
        }
        Ok(PreparedCase {
            case,
            packer,
            region,
            m_bytes,
            nrep,
        })
    }

    /// One run: fresh endpoints, warmups, then `nrep` timed round trips in seconds.
    pub fn run_once(&self, clock: &ClockSource, run: usize) -> Result<Vec<f64>> {
        let cfg = SessionConfig {
            transport: self.case.transport,
            method: self.case.method,
            warmups: WARMUPS,
            reps: self.nrep,
        };
        let result = run_session(
            cfg,
            self.packer.clone(),
            self.region.clone(),
            clock.make(run),
            clock.make(run),
        )
        .map_err(|e| e.with_context(self.case.case_id.clone()))?;
        Ok(result
            .samples_ns
            .into_iter()
            .map(|ns| ns as f64 / 1e9)
            .collect())
    }
}

/// Execute all runs of one case.
pub fn run_case(
    case: &BenchCase,
    clock: &ClockSource,
    seed: u64,
    keep_raw: bool,
) -> Result<RunStats> {
    let mut stats = run_interleaved(std::slice::from_ref(case), clock, seed, keep_raw)?;
    Ok(stats.remove(0))
}

/// Execute several cases run by run (run 0 of every case, then run 1, ...), so that
/// slow drifts of the machine hit all of them alike.
pub fn run_interleaved(
    cases: &[BenchCase],
    clock: &ClockSource,
    seed: u64,
    keep_raw: bool,
) -> Result<Vec<RunStats>> {
    let prepared = cases
        .iter()
        .map(|c| PreparedCase::new(c.clone(), seed))
        .collect::<Result<Vec<_>>>()?;
    let runs = prepared.iter().map(|p| p.case.r).max().unwrap_or(0);
    let mut samples: Vec<Vec<Vec<f64>>> = vec![Vec::new(); prepared.len()];
    for run in 0..runs {
        for (p, out) in prepared.iter().zip(&mut samples) {
            if run < p.case.r {
                out.push(p.run_once(clock, run)?);
            }
        }
    }
    Ok(prepared
        .iter()
        .zip(samples)
        .map(|(p, runs)| RunStats::from_runs(p.case.case_id.clone(), runs, keep_raw))
        .collect())
}
