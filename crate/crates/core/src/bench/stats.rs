use serde::{Deserialize, Serialize};

/// Repetitions per run for a message of `m` bytes.
pub fn nrep_schedule(m: u64) -> usize {
    match m {
        0..=32_000 => 100,
        32_001..=320_000 => 50,
        _ => 20,
    }
}

/// Median of a non-empty sample; the mean of the two middle values for even lengths.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of an empty sample");
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        (s[mid - 1] + s[mid]) / 2.0
    }
}

/// Per-run medians and their summary, all in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub case_id: String,
    pub r: usize,
    pub nrep: usize,
    pub per_run_medians: Vec<f64>,
    pub mean_of_medians: f64,
    pub min_of_medians: f64,
    pub max_of_medians: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<Vec<f64>>>,
}

impl RunStats {
    /// Reduce `r` runs of `nrep` samples each: median per run, then mean/min/max.
    pub fn from_runs(case_id: impl Into<String>, runs: Vec<Vec<f64>>, keep_raw: bool) -> Self {
        assert!(!runs.is_empty(), "at least one run is required");
        let nrep = runs[0].len();
        let per_run_medians: Vec<f64> = runs.iter().map(|r| median(r)).collect();
        let r = per_run_medians.len();
        let mean_of_medians = per_run_medians.iter().sum::<f64>() / r as f64;
        let min_of_medians = per_run_medians
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let max_of_medians = per_run_medians
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        RunStats {
            case_id: case_id.into(),
            r,
            nrep,
            per_run_medians,
            // Rounding can put the mean a hair outside [min, max] for equal medians.
            mean_of_medians: mean_of_medians.clamp(min_of_medians, max_of_medians),
            min_of_medians,
            max_of_medians,
            raw: keep_raw.then_some(runs),
        }
    }

    /// The same statistics with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.per_run_medians.iter_mut().for_each(|m| *m *= factor);
        s.mean_of_medians *= factor;
        s.min_of_medians *= factor;
        s.max_of_medians *= factor;
        if let Some(raw) = &mut s.raw {
            raw.iter_mut().flatten().for_each(|x| *x *= factor);
        }
        s
    }
}
