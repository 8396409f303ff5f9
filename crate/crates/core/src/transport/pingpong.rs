//! Two-party round trips. The ping side starts the timer after a one-byte barrier,
//! the pong side times its own half, and a round counts as the slower of the two.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use super::endpoint::{make_pair, Endpoint, TransportKind};
use crate::clock::{Clock, MonotonicClock};
use crate::error::{Error, Result};
use crate::packer::{Engine, Packer};
use crate::typecore::CommittedType;

/// How the payload gets onto the wire.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Pack straight into the outgoing frame, unpack straight out of the incoming one.
    #[default]
    Typed,
    /// Pack into a user buffer, send it as bytes; receive bytes, then unpack.
    Packed,
    /// Send the first `payload` bytes of the region as they are.
    Raw,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Typed => "typed",
            Method::Packed => "packed",
            Method::Raw => "raw",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "typed" => Ok(Method::Typed),
            "packed" => Ok(Method::Packed),
            "raw" => Ok(Method::Raw),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// State one side keeps across repetitions.
pub struct Party {
    packer: Arc<Packer>,
    region: Vec<u8>,
    scratch: Vec<u8>,
}

impl Party {
    pub fn new(packer: Arc<Packer>, region: Vec<u8>) -> Result<Self> {
        if region.len() < packer.region_len() {
            return Err(Error::RegionTooSmall {
                needed: packer.region_len(),
                available: region.len(),
            });
        }
        let scratch = vec![0; packer.packed_len()];
        Ok(Party {
            packer,
            region,
            scratch,
        })
    }

    pub fn region(&self) -> &[u8] {
        &self.region
    }

    pub fn into_region(self) -> Vec<u8> {
        self.region
    }
}

pub fn send_payload(ep: &mut Endpoint, method: Method, p: &mut Party) -> Result<()> {
    let len = p.packer.packed_len();
    match method {
        Method::Typed => {
            let (packer, region) = (&p.packer, &p.region);
            ep.send_with(len, |frame| packer.pack_into(region, frame))
        }
        Method::Packed => {
            p.packer.pack_into(&p.region, &mut p.scratch)?;
            ep.send(&p.scratch)
        }
        Method::Raw => ep.send(&p.region[..len]),
    }
}

pub fn recv_payload(ep: &mut Endpoint, method: Method, p: &mut Party) -> Result<()> {
    let len = p.packer.packed_len();
    let check = |frame: &[u8]| {
        if frame.len() == len {
            Ok(())
        } else {
            Err(Error::Protocol(format!(
                "expected {len} payload bytes, got {}",
                frame.len()
            )))
        }
    };
    match method {
        Method::Typed => {
            let (packer, region) = (&p.packer, &mut p.region);
            ep.recv_with(|frame| {
                check(frame)?;
                packer.unpack(frame, region)
            })
        }
        Method::Packed => {
            let scratch = &mut p.scratch;
            ep.recv_with(|frame| {
                check(frame)?;
                scratch.copy_from_slice(frame);
                Ok(())
            })?;
            p.packer.unpack(&p.scratch, &mut p.region)
        }
        Method::Raw => {
            let region = &mut p.region[..len];
            ep.recv_with(|frame| {
                check(frame)?;
                region.copy_from_slice(frame);
                Ok(())
            })
        }
    }
}

fn barrier_byte(frame: &[u8]) -> Result<()> {
    match frame {
        [_] => Ok(()),
        _ => Err(Error::Protocol("barrier message must be one byte".into())),
    }
}

fn elapsed(clock: &mut Option<&mut dyn Clock>, start: u64) -> u64 {
    clock
        .as_mut()
        .map_or(0, |c| c.now_ns().saturating_sub(start))
}

fn start(clock: &mut Option<&mut dyn Clock>) -> u64 {
    clock.as_mut().map_or(0, |c| c.now_ns())
}

/// One round trip from the ping side; returns the slower side's time in ns.
/// Without a clock the round is an untimed warmup.
pub fn ping_round(
    ep: &mut Endpoint,
    method: Method,
    p: &mut Party,
    mut clock: Option<&mut dyn Clock>,
) -> Result<u64> {
    ep.send(&[0])?;
    ep.recv_with(barrier_byte)?;
    let t0 = start(&mut clock);
    send_payload(ep, method, p)?;
    recv_payload(ep, method, p)?;
    let mine = elapsed(&mut clock, t0);
    let theirs = ep.recv_with(|b| {
        let bytes: [u8; 8] = b
            .try_into()
            .map_err(|_| Error::Protocol("elapsed time must be 8 bytes".into()))?;
        Ok(u64::from_le_bytes(bytes))
    })?;
    Ok(mine.max(theirs))
}

pub fn pong_round(
    ep: &mut Endpoint,
    method: Method,
    p: &mut Party,
    mut clock: Option<&mut dyn Clock>,
) -> Result<()> {
    ep.recv_with(barrier_byte)?;
    ep.send(&[0])?;
    let t0 = start(&mut clock);
    recv_payload(ep, method, p)?;
    send_payload(ep, method, p)?;
    let mine = elapsed(&mut clock, t0);
    ep.send(&mine.to_le_bytes())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub transport: TransportKind,
    pub method: Method,
    pub warmups: usize,
    pub reps: usize,
}

/// Outcome of one session: timed samples and the pong side's final region.
pub struct SessionResult {
    pub samples_ns: Vec<u64>,
    pub pong_region: Vec<u8>,
}

/// Connect a fresh pair, run the warmups and timed repetitions with pong on its
/// own thread.
pub fn run_session(
    cfg: SessionConfig,
    packer: Arc<Packer>,
    ping_region: Vec<u8>,
    mut ping_clock: Box<dyn Clock>,
    mut pong_clock: Box<dyn Clock>,
) -> Result<SessionResult> {
    let (ping_ep, pong_ep) = make_pair(cfg.transport)?;
    let pong_region = vec![0; ping_region.len()];
    let mut ping = Party::new(packer.clone(), ping_region)?;
    let mut pong = Party::new(packer, pong_region)?;
    let rounds = cfg.warmups + cfg.reps;
    thread::scope(|s| {
        let pong_side = s.spawn(move || -> Result<Vec<u8>> {
            let mut ep = pong_ep;
            for i in 0..rounds {
                let clock: Option<&mut dyn Clock> = if i >= cfg.warmups {
                    Some(&mut *pong_clock)
                } else {
                    None
                };
                pong_round(&mut ep, cfg.method, &mut pong, clock)?;
            }
            Ok(pong.into_region())
        });
        let ping_result = (|| -> Result<Vec<u64>> {
            let mut ep = ping_ep;
            let mut samples = Vec::with_capacity(cfg.reps);
            for i in 0..rounds {
                let clock: Option<&mut dyn Clock> = if i >= cfg.warmups {
                    Some(&mut *ping_clock)
                } else {
                    None
                };
                let ns = ping_round(&mut ep, cfg.method, &mut ping, clock)?;
                if i >= cfg.warmups {
                    samples.push(ns);
                }
            }
            Ok(samples)
        })();
        let pong_result = pong_side
            .join()
            .map_err(|_| Error::Protocol("pong side panicked".into()))?;
        match (ping_result, pong_result) {
            (Ok(samples_ns), Ok(pong_region)) => Ok(SessionResult {
                samples_ns,
                pong_region,
            }),
            (Err(Error::PeerClosed), Err(e)) | (Err(e), _) | (_, Err(e)) => Err(e),
        }
    })
}

fn single_round(
    kind: TransportKind,
    method: Method,
    t: Arc<CommittedType>,
    count: u64,
    region: &[u8],
    engine: Engine,
) -> Result<f64> {
    let packer = Arc::new(Packer::new(t, count, engine)?);
    let cfg = SessionConfig {
        transport: kind,
        method,
        warmups: 0,
        reps: 1,
    };
    let r = run_session(
        cfg,
        packer,
        region.to_vec(),
        Box::new(MonotonicClock::default()),
        Box::new(MonotonicClock::default()),
    )?;
    Ok(r.samples_ns[0] as f64 / 1e9)
}

/// One typed round trip, in seconds.
pub fn pingpong_typed(
    kind: TransportKind,
    t: Arc<CommittedType>,
    count: u64,
    region: &[u8],
    engine: Engine,
) -> Result<f64> {
    single_round(kind, Method::Typed, t, count, region, engine)
}

/// One explicitly packed round trip, in seconds.
pub fn pingpong_packed(
    kind: TransportKind,
    t: Arc<CommittedType>,
    count: u64,
    region: &[u8],
    engine: Engine,
) -> Result<f64> {
    single_round(kind, Method::Packed, t, count, region, engine)
}
