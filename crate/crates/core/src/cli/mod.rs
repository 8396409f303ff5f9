//! Command-line front end.

mod plan;
mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

pub use plan::{
    registry_layouts, run_plan, ExperimentId, ExperimentOutput, ExperimentPlan, PlannedCases, Sizes,
};
pub use report::{summarize, write_summary_csv, SummaryRow};

use crate::bench::{read_bench_csv_file, write_bench_csv_file, write_raw_sidecar};
use crate::clock::ClockSource;
use crate::error::{Error, Result};
use crate::guidelines::{write_verdict_csv, CheckOptions};
use crate::layouts::{build, LayoutSpec, Variant};
use crate::normalizer::normalize;
use crate::packer::{Engine, Packer};
use crate::transport::TransportKind;
use crate::typecore::{commit_arc, equivalent, flatten, Datatype};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_EQUIVALENT: i32 = 2;
pub const EXIT_VIOLATIONS: i32 = 3;

/// Environment variable that takes precedence over `--out`.
pub const OUT_ENV: &str = "TYPEFORGE_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "typeforge",
    version,
    about = "Derived datatype layouts, packing and guideline checks"
)]
pub struct Cli {
    #[arg(long, global = true, default_value = "inmem")]
    pub transport: TransportKind,
    #[arg(long, global = true, default_value = "compiled")]
    pub engine: Engine,
    #[arg(long, global = true, default_value_t = crate::guidelines::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Independent runs per case.
    #[arg(long = "r", global = true, default_value_t = crate::bench::DEFAULT_RUNS)]
    pub r: usize,
    /// Seed for region contents.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output directory (overridden by TYPEFORGE_OUT).
    #[arg(long, global = true, default_value = "typeforge-out")]
    pub out: PathBuf,
    /// Also write every raw sample as JSON.
    #[arg(long, global = true)]
    pub raw: bool,
    /// Fixed repetitions per run instead of the size schedule.
    #[arg(long, global = true)]
    pub nrep: Option<usize>,
    /// Re-measurements a violation must survive before it is reported.
    #[arg(long, global = true, default_value_t = 1)]
    pub confirm: usize,
    /// Replace the clock by one where every interval lasts this many ns (test mode).
    #[arg(long, global = true, hide = true)]
    pub fake_clock_ns: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the ordered byte segments of a type.
    Flatten {
        /// Datatype or layout spec, as a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        count: Option<u64>,
    },
    /// Print a type, its normalized form and the normalization report.
    Normalize {
        #[arg(long)]
        spec: String,
    },
    /// Exit 0 if both descriptions denote the same segments, 2 otherwise.
    Equiv {
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        /// Repetition count of the preceding --lhs or --rhs.
        #[arg(long, action = clap::ArgAction::Append)]
        count: Vec<u64>,
    },
    /// Pack a binary region with a type.
    Pack {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        input: PathBuf,
        /// Destination file; stdout if absent.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        count: Option<u64>,
    },
    /// Run an experiment and write its bench and verdict CSVs.
    Run(RunArgs),
    /// Merge bench CSVs into a summary table.
    Report {
        files: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the guideline checks and print the verdict CSV.
    Verify(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Experiment id, or `all`.
    #[arg(long, default_value = "all")]
    pub experiment: String,
    /// Blocksizes to sweep instead of the experiment's table.
    #[arg(long = "a", value_delimiter = ',')]
    pub a: Vec<u64>,
    /// Payload sizes in bytes.
    #[arg(long = "m", value_delimiter = ',')]
    pub m: Vec<u64>,
    /// Element counts (instead of --m).
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Rejected: cases must not run concurrently.
    #[arg(long)]
    pub parallel: bool,
}

impl Cli {
    pub fn out_dir(&self) -> PathBuf {
        std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| self.out.clone())
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            transport: self.transport,
            engine: self.engine,
            r: self.r,
            nrep: self.nrep,
            threshold: self.threshold,
            clock: match self.fake_clock_ns {
                Some(step_ns) => ClockSource::Fake { step_ns },
                None => ClockSource::Monotonic,
            },
            seed: self.seed,
            keep_raw: self.raw,
            confirmations: self.confirm,
            ..CheckOptions::default()
        }
    }
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_ERROR;
        }
    };
    match dispatch(&cli, &matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli, matches: &ArgMatches) -> Result<i32> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Flatten { spec, count } => {
            let (t, default_count) = load_type(spec)?;
            let layout = flatten(&t, count.unwrap_or(default_count))?;
            writeln!(out, "{}", serde_json::to_string(&layout.segments)?)?;
            Ok(EXIT_OK)
        }
        Command::Normalize { spec } => {
            let (t, _) = load_type(spec)?;
            let (n, report) = normalize(&t)?;
            let doc = serde_json::json!({ "input": &*t, "output": n, "report": report });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            Ok(EXIT_OK)
        }
        Command::Equiv { lhs, rhs, .. } => {
            let sub = matches.subcommand_matches("equiv").expect("equiv matches");
            let (lc, rc) = paired_counts(sub)?;
            let (lt, ld) = load_type(lhs)?;
            let (rt, rd) = load_type(rhs)?;
            let same = equivalent(&lt, lc.unwrap_or(ld), &rt, rc.unwrap_or(rd))?;
            writeln!(out, "{}", if same { "equivalent" } else { "different" })?;
            Ok(if same { EXIT_OK } else { EXIT_NOT_EQUIVALENT })
        }
        Command::Pack {
            spec,
            input,
            output,
            count,
        } => {
            let (t, default_count) = load_type(spec)?;
            let committed = Arc::new(commit_arc(t)?);
            let packer = Packer::new(committed, count.unwrap_or(default_count), cli.engine)?;
            let src = fs::read(input)?;
            let packed = packer.pack(&src)?;
            match output {
                Some(p) => fs::write(p, &packed)?,
                None => out.write_all(&packed)?,
            }
            Ok(EXIT_OK)
        }
        Command::Run(args) => cmd_run(cli, args, true, &mut out),
        Command::Verify(args) => cmd_run(cli, args, false, &mut out),
        Command::Report { files, output } => {
            if files.is_empty() {
                return Err(Error::InvalidArgument(
                    "report needs at least one CSV".into(),
                ));
            }
            let mut rows = Vec::new();
            for f in files {
                rows.extend(
                    read_bench_csv_file(f).map_err(|e| e.with_context(f.display().to_string()))?,
                );
            }
            let summary = summarize(rows);
            match output {
                Some(p) => write_summary_csv(fs::File::create(p)?, &summary)?,
                None => write_summary_csv(&mut out, &summary)?,
            }
            Ok(EXIT_OK)
        }
    }
}

/// Attach each `--count` to the nearest `--lhs`/`--rhs` given before it.
fn paired_counts(m: &ArgMatches) -> Result<(Option<u64>, Option<u64>)> {
    let index = |name: &str| m.indices_of(name).and_then(|mut i| i.next());
    let (li, ri) = (index("lhs"), index("rhs"));
    let mut lhs = None;
    let mut rhs = None;
    let counts: Vec<u64> = m
        .get_many::<u64>("count")
        .map(|v| v.copied().collect())
        .unwrap_or_default();
    let positions: Vec<usize> = m
        .indices_of("count")
        .map(|i| i.collect())
        .unwrap_or_default();
    for (c, at) in counts.into_iter().zip(positions) {
        let after_l = li.filter(|&l| l < at);
        let after_r = ri.filter(|&r| r < at);
        let slot = match (after_l, after_r) {
            (Some(l), Some(r)) if r > l => &mut rhs,
            (Some(_), _) => &mut lhs,
            (None, Some(_)) => &mut rhs,
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "--count must follow --lhs or --rhs".into(),
                ))
            }
        };
        if slot.replace(c).is_some() {
            return Err(Error::InvalidArgument(
                "two --count values for one side".into(),
            ));
        }
    }
    Ok((lhs, rhs))
}

/// A datatype or layout spec as JSON, given inline or as a file path, with its
/// default repetition count.
pub fn load_type(arg: &str) -> Result<(Arc<Datatype>, u64)> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::from(e).with_context(arg.to_string()))?
    };
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("kind").is_some() {
        let t: Datatype = serde_json::from_value(value)?;
        Ok((Arc::new(t), 1))
    } else if value.get("id").is_some() {
        let spec: LayoutSpec = serde_json::from_value(value)?;
        let b = build(&spec)?;
        Ok((b.datatype, b.count))
    } else {
        Err(Error::InvalidArgument(
            "expected a datatype (with \"kind\") or a layout spec (with \"id\")".into(),
        ))
    }
}

fn plans(args: &RunArgs) -> Result<Vec<ExperimentPlan>> {
    let ids = if args.experiment == "all" {
        ExperimentId::ALL.to_vec()
    } else {
        args.experiment
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<ExperimentId>>>()?
    };
    if !args.m.is_empty() && !args.n.is_empty() {
        return Err(Error::InvalidArgument(
            "give either --m or --n, not both".into(),
        ));
    }
    Ok(ids
        .into_iter()
        .map(|id| {
            let mut p = ExperimentPlan::default_for(id);
            if !args.a.is_empty() {
                p.a_values = args.a.clone();
            }
            if !args.m.is_empty() {
                p.sizes = Sizes::Bytes(args.m.clone());
            }
            if !args.n.is_empty() {
                p.sizes = Sizes::Elements(args.n.clone());
            }
            if let Some(v) = args.variant {
                p.variants = vec![v];
            }
            p
        })
        .collect())
}

fn cmd_run(cli: &Cli, args: &RunArgs, write_files: bool, out: &mut dyn Write) -> Result<i32> {
    if args.parallel {
        return Err(Error::InvalidArgument(
            "--parallel is not supported: concurrent cases disturb each other's timings".into(),
        ));
    }
    let opts = cli.check_options();
    let dir = cli.out_dir();
    let mut all = ExperimentOutput::default();
    for plan in plans(args)? {
        let result = run_plan(&plan, &opts).map_err(|e| e.with_context(plan.id.name()))?;
        if write_files {
            write_outputs(&dir, plan.id.name(), &result, cli.raw)?;
        }
        eprintln!(
            "{}: {} cases, {} verdicts, {} violations, {} skipped",
            plan.id,
            result.rows.len(),
            result.verdicts.len(),
            result.violations(),
            result.skipped.len()
        );
        all.extend(result);
    }
    if write_files {
        writeln!(out, "wrote results to {}", dir.display())?;
    } else {
        write_verdict_csv(&mut *out, &all.verdicts)?;
    }
    Ok(if all.violations() > 0 {
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    })
}

fn write_outputs(dir: &Path, name: &str, result: &ExperimentOutput, raw: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_bench_csv_file(&dir.join(format!("{name}_bench.csv")), &result.rows)?;
    write_verdict_csv(
        fs::File::create(dir.join(format!("{name}_verdicts.csv")))?,
        &result.verdicts,
    )?;
    if raw {
        write_raw_sidecar(&dir.join(format!("{name}_raw.json")), &result.stats)?;
    }
    Ok(())
}
