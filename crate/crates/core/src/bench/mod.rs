//! Timing harness: warmups, repeated ping-pongs per run, and the median-of-runs
//! reduction.

mod case;
mod output;
mod stats;

pub use case::{run_case, run_interleaved, BenchCase, PreparedCase, DEFAULT_RUNS, WARMUPS};
pub use output::{
    format_seconds, read_bench_csv, read_bench_csv_file, write_bench_csv, write_bench_csv_file,
    write_raw_sidecar, BenchRow,
};
pub use stats::{median, nrep_schedule, RunStats};
