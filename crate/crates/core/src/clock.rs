//! Injectable time sources. Each side of a ping-pong owns its own clock.

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub trait Clock: Send {
    /// Nanoseconds since an arbitrary, fixed origin.
    fn now_ns(&mut self) -> u64;
}

pub struct MonotonicClock {
    origin: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for MonotonicClock {
    fn now_ns(&mut self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }
}

/// Advances by a fixed step on every reading, so every interval is `step_ns`.
pub struct FakeClock {
    now: u64,
    step_ns: u64,
}

impl FakeClock {
    pub fn new(step_ns: u64) -> Self {
        FakeClock { now: 0, step_ns }
    }
}

impl Clock for FakeClock {
    fn now_ns(&mut self) -> u64 {
        let t = self.now;
        self.now += self.step_ns;
        t
    }
}

/// Replays interval lengths: readings come in start/end pairs, and the i-th pair is
/// `durations[i % len]` apart.
pub struct ScriptedClock {
    durations: Vec<u64>,
    readings: usize,
    now: u64,
}

impl ScriptedClock {
    pub fn new(durations: Vec<u64>) -> Self {
        assert!(
            !durations.is_empty(),
            "scripted clock needs at least one duration"
        );
        ScriptedClock {
            durations,
            readings: 0,
            now: 0,
        }
    }
}

impl Clock for ScriptedClock {
    fn now_ns(&mut self) -> u64 {
        if self.readings % 2 == 1 {
            let i = (self.readings / 2) % self.durations.len();
            self.now += self.durations[i];
        }
        self.readings += 1;
        self.now
    }
}

/// Recipe for the clocks a benchmark hands to each side of each run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockSource {
    #[default]
    Monotonic,
    /// Every timed interval lasts exactly this many nanoseconds.
    Fake { step_ns: u64 },
    /// Per-run interval scripts, cycled over runs.
    Scripted { runs: Vec<Vec<u64>> },
}

impl ClockSource {
    pub fn make(&self, run: usize) -> Box<dyn Clock> {
        match self {
            ClockSource::Monotonic => Box::new(MonotonicClock::default()),
            ClockSource::Fake { step_ns } => Box::new(FakeClock::new(*step_ns)),
            ClockSource::Scripted { runs } => {
                Box::new(ScriptedClock::new(runs[run % runs.len()].clone()))
            }
        }
    }

    pub fn is_synthetic(&self) -> bool {
        !matches!(self, ClockSource::Monotonic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fake_intervals_are_constant() {
        let mut c = FakeClock::new(10_000);
        let a = c.now_ns();
        let b = c.now_ns();
        assert_eq!(b - a, 10_000);
    }

    #[test]
    fn scripted_pairs() {
        let mut c = ScriptedClock::new(vec![1, 2, 100]);
        let got: Vec<u64> = (0..4)
            .map(|_| {
                let a = c.now_ns();
                c.now_ns() - a
            })
            .collect();
        assert_eq!(got, vec![1, 2, 100, 1]);
    }
}
