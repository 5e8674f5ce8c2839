//! The `rwt` command line: synthetic data, estimation, full transforms and benchmark sweeps.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 capacity error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::baselines::{exhaustive_threshold_search, ideal_estimator, ott_kronmal};
use crate::error::{Error, Result};
use crate::estimator::{
    empirical_coefficients_dense, rwt_estimate, QueuePolicy, ThresholdSchedule, TraversalConfig,
    DEFAULT_CALL_LIMIT,
};
use crate::eval::{mse_exact, ResultRow, CSV_HEADER};
use crate::fwht::ORACLE_CAP;
use crate::io;
use crate::model::{BernoulliMixture, MixtureSpec};

#[derive(Parser, Debug)]
#[command(
    name = "rwt",
    version,
    about = "Sparse Walsh-series density estimation for binary data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random Bernoulli mixture and sample datasets from it.
    Synth(SynthArgs),
    /// Estimate the retained Walsh coefficients of a dataset.
    Estimate(EstimateArgs),
    /// Write all 2^d empirical coefficients of a dataset.
    Oracle(OracleArgs),
    /// Sweep sample sizes and seeds, writing one risk row per estimator run.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct MixtureArgs {
    /// Number of binary covariates.
    #[arg(long)]
    dim: usize,
    /// Seed for the mixture parameters (and the default sample seed).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    components: usize,
    /// Biased covariates per component.
    #[arg(long, default_value_t = 3)]
    biased: usize,
    /// Success probability of the biased covariates.
    #[arg(long, default_value_t = 0.9)]
    bias: f64,
}

impl MixtureArgs {
    fn build(&self) -> Result<BernoulliMixture> {
        BernoulliMixture::synthetic(&MixtureSpec {
            dim: self.dim,
            components: self.components,
            biased: self.biased,
            bias: self.bias,
            seed: self.seed,
        })
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    mixture: MixtureArgs,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Sampling seeds, comma separated; defaults to the mixture seed.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScheduleChoice {
    Constant,
    #[value(alias = "logarithmic")]
    Log,
    Linear,
    Custom,
    Adaptive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QueueChoice {
    Depth,
    Breadth,
    Weight,
}

#[derive(Args, Debug)]
struct TraversalArgs {
    /// Children per tree step; a power of two.
    #[arg(long, default_value_t = 2)]
    branching: usize,
    /// Largest Hamming weight of a retained index.
    #[arg(long)]
    max_order: Option<usize>,
    /// Expand only this many of the heaviest branches per level.
    #[arg(long)]
    top_q: Option<usize>,
    #[arg(long, value_enum, default_value = "weight")]
    queue: QueueChoice,
    /// Multiplier on every threshold.
    #[arg(long, default_value_t = 1.0)]
    threshold_scale: f64,
    /// Level constants alpha_1..alpha_d for the custom schedule, comma separated.
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Give up after this many recursive calls; 0 for no limit.
    #[arg(long, default_value_t = DEFAULT_CALL_LIMIT)]
    call_limit: u64,
}

impl TraversalArgs {
    fn config(&self) -> TraversalConfig {
        let mut config = TraversalConfig::default()
            .with_branching(self.branching)
            .with_queue_policy(match self.queue {
                QueueChoice::Depth => QueuePolicy::DepthFirst,
                QueueChoice::Breadth => QueuePolicy::BreadthFirst,
                QueueChoice::Weight => QueuePolicy::MaxWeight,
            });
        config.max_order = self.max_order;
        config.top_q = self.top_q;
        config.with_call_limit((self.call_limit > 0).then_some(self.call_limit))
    }

    fn schedule(&self, choice: ScheduleChoice, dim: usize) -> Result<ThresholdSchedule> {
        if choice != ScheduleChoice::Custom && !self.alphas.is_empty() {
            return Err(Error::invalid(
                "--alphas only applies to the custom schedule",
            ));
        }
        let schedule = match choice {
            ScheduleChoice::Constant => ThresholdSchedule::constant(),
            ScheduleChoice::Log => ThresholdSchedule::logarithmic(),
            ScheduleChoice::Linear => ThresholdSchedule::linear(),
            ScheduleChoice::Custom => {
                if self.alphas.len() != dim {
                    return Err(Error::invalid(format!(
                        "custom schedule needs {dim} values in --alphas, got {}",
                        self.alphas.len()
                    )));
                }
                ThresholdSchedule::custom(self.alphas.clone())
            }
            ScheduleChoice::Adaptive => {
                let q = self
                    .top_q
                    .ok_or_else(|| Error::invalid("the adaptive schedule needs --top-q"))?;
                ThresholdSchedule::adaptive(q)
            }
        }
        .with_scale(self.threshold_scale);
        schedule.validate(dim)?;
        Ok(schedule)
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Dataset file.
    #[arg(long)]
    input: PathBuf,
    /// Coefficient CSV to write.
    #[arg(long)]
    output: PathBuf,
    /// Statistics file; defaults to the output path with `.stats.json` appended.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "constant")]
    schedule: ScheduleChoice,
    #[command(flatten)]
    traversal: TraversalArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    mixture: MixtureArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Sampling seeds, comma separated; defaults to the mixture seed.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "constant,log,linear"
    )]
    schedules: Vec<ScheduleChoice>,
    #[command(flatten)]
    traversal: TraversalArgs,
    /// Skip the termwise baselines even when the dimension allows them.
    #[arg(long)]
    no_baselines: bool,
    /// Results CSV to write.
    #[arg(long)]
    output: PathBuf,
}

/// Exit status for an error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidArgument(_) => 1,
        Error::Capacity(_) => 3,
        _ => 2,
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::write(path, contents)?)
}

fn positive(values: &[usize], what: &str) -> Result<()> {
    if values.contains(&0) {
        return Err(Error::invalid(format!("{what} must be positive")));
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    positive(&args.sizes, "sample sizes")?;
    let mixture = args.mixture.build()?;
    let seeds = if args.seeds.is_empty() {
        vec![args.mixture.seed]
    } else {
        args.seeds.clone()
    };
    fs::create_dir_all(&args.output)?;
    write(
        &args.output.join("mixture.json"),
        &io::format_mixture(&mixture),
    )?;
    for &n in &args.sizes {
        for &seed in &seeds {
            let data = mixture.sample(n, seed)?;
            let name = format!("data_d{}_n{n}_s{seed}.txt", mixture.dim());
            io::write_dataset(&args.output.join(name), &data)?;
        }
    }
    Ok(())
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    let schedule = args.traversal.schedule(args.schedule, data.dim())?;
    let config = args.traversal.config();
    let (est, stats) = rwt_estimate(&data, &schedule, &config)?;
    write(&args.output, &io::format_coefficients(&est))?;
    let stats_path = args.stats.clone().unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".stats.json");
        PathBuf::from(p)
    });
    write(&stats_path, &io::to_json(&stats))?;
    println!(
        "retained {} coefficients in {} recursive calls",
        stats.retained_coefficients, stats.recursive_calls
    );
    Ok(())
}

fn oracle(args: &OracleArgs) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    if data.dim() > ORACLE_CAP {
        return Err(Error::Capacity(format!(
            "full transform limited to d <= {ORACLE_CAP}, got {}",
            data.dim()
        )));
    }
    let theta = empirical_coefficients_dense(&data)?;
    write(&args.output, &io::format_dense_coefficients(&theta))
}

fn bench_cell(
    args: &BenchArgs,
    mixture: &BernoulliMixture,
    n: usize,
    seed: u64,
) -> Result<Vec<ResultRow>> {
    let d = mixture.dim();
    let data = mixture.sample(n, seed)?;
    let config = args.traversal.config();
    let mut rows = Vec::new();
    for &choice in &args.schedules {
        let schedule = args.traversal.schedule(choice, d)?;
        let (est, stats) = rwt_estimate(&data, &schedule, &config)?;
        let report = mse_exact(&est, mixture)?;
        rows.push(
            ResultRow::new("rwt", schedule.name(), d, n, seed).with_report(
                &report,
                Some(stats.recursive_calls),
                stats.wall_time_ms,
            ),
        );
    }
    if args.no_baselines {
        return Ok(rows);
    }
    for name in ["ott_kronmal", "exhaustive_search", "ideal"] {
        if d > ORACLE_CAP {
            eprintln!("warning: skipping {name} at d={d} (over the cap of {ORACLE_CAP})");
            rows.push(ResultRow::new(name, "skipped_over_cap", d, n, seed));
            continue;
        }
        let start = Instant::now();
        let est = match name {
            "ott_kronmal" => ott_kronmal(&data)?,
            "exhaustive_search" => exhaustive_threshold_search(&data, mixture)?.estimate,
            _ => ideal_estimator(&data, mixture)?,
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let report = mse_exact(&est, mixture)?;
        rows.push(ResultRow::new(name, "-", d, n, seed).with_report(&report, None, elapsed));
    }
    Ok(rows)
}

fn bench(args: &BenchArgs) -> Result<()> {
    positive(&args.sizes, "sample sizes")?;
    let mixture = args.mixture.build()?;
    for &choice in &args.schedules {
        args.traversal.schedule(choice, mixture.dim())?;
    }
    args.traversal.config().validate(mixture.dim())?;
    let seeds = if args.seeds.is_empty() {
        vec![args.mixture.seed]
    } else {
        args.seeds.clone()
    };
    let cells: Vec<(usize, u64)> = args
        .sizes
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(n, seed)| bench_cell(args, &mixture, n, seed))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = results.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (&a.estimator, &a.schedule, a.n, a.seed).cmp(&(&b.estimator, &b.schedule, b.n, b.seed))
    });
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for row in &rows {
        text.push_str(&row.to_csv());
        text.push('\n');
    }
    write(&args.output, &text)
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Estimate(a) => estimate(a),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
