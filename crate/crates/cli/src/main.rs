//! `bahadur`: simulate dependent sample paths, run Bahadur-representation
//! experiments, compare the exponential inequality with simulation and
//! estimate Value-at-Risk.

mod process;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bahadur_core::bounds::{
    bound_vs_montecarlo, default_eps_grid, BlockRounding, BoundExperiment, Transform,
};
use bahadur_core::harness::report::{diagnostics_csv, fits_csv, write_file};
use bahadur_core::harness::{
    fit_rate, geometric_grid, read_series, run_experiment_detailed, var_estimate, Aggregate,
    EnvelopeChoice, Format, Report, RunConfig, SeriesKind, Statistic,
};
use bahadur_core::{ProcessConfig, ProcessSpec};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use process::ProcessArgs;

/// Environment variable selecting the number of worker threads.
const THREADS_ENV: &str = "BAHADUR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bahadur", version, about)]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one sample path and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a Monte-Carlo experiment over an n-grid and fit convergence rates.
    Rates(RatesArgs),
    /// Compare the exponential tail bound with simulated tail probabilities.
    Bounds(BoundsArgs),
    /// Value-at-Risk from a price or return series.
    Var(VarArgs),
    /// Re-render a stored JSON report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes to `out`, or to stdout when absent.
fn output(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => Ok(write_file(path, contents)?),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    process: ProcessConfig,
    n: usize,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    /// TOML file with `n`, `seed` and a `[process]` table.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    process: ProcessArgs,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let base = args.config.as_deref().map(read_config::<SimulateConfig>).transpose()?;
    let (process, n, seed) = match base {
        Some(c) => (c.process, Some(c.n), c.seed),
        None => (ProcessConfig::iid(bahadur_core::Marginal::standard_uniform()), None, 0),
    };
    let process = args.process.apply(process)?;
    let n = args.n.or(n).context("sample size missing: pass --n or set `n` in the config")?;
    let seed = args.seed.unwrap_or(seed);
    let path = ProcessSpec::new(process)?.generate(n, seed)?;
    output(args.out.as_deref(), &path.to_csv())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatisticArg {
    AbsRemainder,
    OscillationNarrow,
    OscillationWide,
    SupDevWide,
    QuantileError,
}

impl From<StatisticArg> for Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::AbsRemainder => Statistic::AbsRemainder,
            StatisticArg::OscillationNarrow => Statistic::OscillationNarrow,
            StatisticArg::OscillationWide => Statistic::OscillationWide,
            StatisticArg::SupDevWide => Statistic::SupDevWide,
            StatisticArg::QuantileError => Statistic::QuantileError,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregateArg {
    Median,
    Q90,
    Q99,
    Max,
}

impl From<AggregateArg> for Aggregate {
    fn from(a: AggregateArg) -> Self {
        match a {
            AggregateArg::Median => Aggregate::Median,
            AggregateArg::Q90 => Aggregate::Q90,
            AggregateArg::Q99 => Aggregate::Q99,
            AggregateArg::Max => Aggregate::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvelopeArg {
    OscillationNarrow,
    OscillationWide,
    DeviationWide,
    QuantileError,
}

impl From<EnvelopeArg> for EnvelopeChoice {
    fn from(e: EnvelopeArg) -> Self {
        match e {
            EnvelopeArg::OscillationNarrow => EnvelopeChoice::OscillationNarrow,
            EnvelopeArg::OscillationWide => EnvelopeChoice::OscillationWide,
            EnvelopeArg::DeviationWide => EnvelopeChoice::DeviationWide,
            EnvelopeArg::QuantileError => EnvelopeChoice::QuantileError,
        }
    }
}

#[derive(Debug, Clone)]
struct Grid(Vec<usize>);

/// `lo..hi` (powers of two) or a comma-separated list.
fn parse_grid(s: &str) -> Result<Grid> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo.trim().parse().context("grid exponent")?;
        let hi: u32 = hi.trim().parse().context("grid exponent")?;
        if lo > hi || hi >= usize::BITS {
            bail!("bad exponent range {s:?}");
        }
        return Ok(Grid(geometric_grid(lo, hi)));
    }
    s.split(',')
        .map(|v| v.trim().parse().with_context(|| format!("bad sample size {v:?}")))
        .collect::<Result<_>>()
        .map(Grid)
}

#[derive(Debug, clap::Args)]
struct RatesArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    process: ProcessArgs,
    /// Probability level; repeat for several.
    #[arg(long = "p")]
    p_list: Vec<f64>,
    /// Sample sizes: `10..17` for 2^10..2^17, or a list `1000,2000`.
    #[arg(long, value_parser = parse_grid)]
    n_grid: Option<Grid>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    statistic: Option<StatisticArg>,
    #[arg(long, value_enum)]
    aggregate: Option<AggregateArg>,
    /// Envelope compared against; defaults to the statistic's own.
    #[arg(long, value_enum)]
    envelope: Option<EnvelopeArg>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Ceiling on sum(n_grid) * reps.
    #[arg(long)]
    sample_budget: Option<u64>,
    /// Run even when the sample budget is exceeded.
    #[arg(long)]
    allow_large: bool,
    /// Directory receiving rates.csv, rates.json and fit.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write one row per replication to replications.csv.
    #[arg(long)]
    replications: bool,
}

impl RatesArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                RunConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => RunConfig::new(
                ProcessConfig::iid(bahadur_core::Marginal::standard_uniform()),
                Statistic::AbsRemainder,
            ),
        };
        cfg.process = self.process.apply(cfg.process)?;
        if !self.p_list.is_empty() {
            cfg.p_list = self.p_list.clone();
        }
        if let Some(g) = &self.n_grid {
            cfg.n_grid = g.0.clone();
        }
        cfg.reps = self.reps.unwrap_or(cfg.reps);
        cfg.master_seed = self.seed.unwrap_or(cfg.master_seed);
        if let Some(s) = self.statistic {
            cfg.statistic = s.into();
        }
        if let Some(a) = self.aggregate {
            cfg.aggregate = a.into();
        }
        if let Some(e) = self.envelope {
            cfg.envelope = Some(e.into());
        }
        cfg.constants.c0 = self.c0.unwrap_or(cfg.constants.c0);
        cfg.constants.theta = self.theta.unwrap_or(cfg.constants.theta);
        cfg.constants.delta = self.delta.unwrap_or(cfg.constants.delta);
        cfg.sample_budget = self.sample_budget.unwrap_or(cfg.sample_budget);
        cfg.allow_large |= self.allow_large;
        Ok(cfg)
    }
}

fn rates(args: RatesArgs) -> Result<()> {
    let cfg = args.config()?;
    let out = run_experiment_detailed(&cfg)?;
    let fits = cfg
        .p_list
        .iter()
        .filter_map(|&p| match fit_rate(&out.table, p) {
            Ok(fit) => Some(fit),
            Err(e) => {
                eprintln!("warning: no rate fit at p = {p}: {e}");
                None
            }
        })
        .collect::<Vec<_>>();
    for fit in &fits {
        println!(
            "p = {}: slope {:.4}, intercept {:.4}, R^2 {:.4}",
            fit.p.unwrap_or(f64::NAN),
            fit.slope,
            fit.intercept,
            fit.r_squared
        );
    }
    let dir = &args.out_dir;
    write_file(&dir.join("fit.csv"), &fits_csv(&fits))?;
    if args.replications {
        write_file(&dir.join("replications.csv"), &diagnostics_csv(&out.replications))?;
    }
    let report = Report::Rates {
        table: out.table,
        fits,
    };
    write_file(&dir.join("rates.csv"), &report.to_csv())?;
    write_file(&dir.join("rates.json"), &report.to_json()?)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BoundsConfig {
    process: ProcessConfig,
    n: usize,
    beta: f64,
    reps: usize,
    seed: u64,
    /// The indicator threshold is the marginal's quantile at this level.
    level: f64,
    eps: Option<Vec<f64>>,
    rounding: BlockRounding,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            process: ProcessConfig::iid(bahadur_core::Marginal::standard_uniform()),
            n: 1000,
            beta: 0.25,
            reps: 10_000,
            seed: 0,
            level: 0.5,
            eps: None,
            rounding: BlockRounding::Floor,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RoundingArg {
    Floor,
    Ceiling,
}

#[derive(Debug, clap::Args)]
struct BoundsArgs {
    /// TOML bounds configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Block-length exponent in (0, 1).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Indicator threshold as a marginal quantile level.
    #[arg(long)]
    level: Option<f64>,
    /// Deviation thresholds, comma-separated; default is 20 multiples of sd/2.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    rounding: Option<RoundingArg>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let mut cfg: BoundsConfig = match &args.config {
        Some(path) => read_config(path)?,
        None => BoundsConfig::default(),
    };
    cfg.process = args.process.apply(cfg.process)?;
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.beta = args.beta.unwrap_or(cfg.beta);
    cfg.reps = args.reps.unwrap_or(cfg.reps);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.level = args.level.unwrap_or(cfg.level);
    if let Some(eps) = args.eps {
        cfg.eps = Some(eps);
    }
    if let Some(r) = args.rounding {
        cfg.rounding = match r {
            RoundingArg::Floor => BlockRounding::Floor,
            RoundingArg::Ceiling => BlockRounding::Ceiling,
        };
    }

    let spec = ProcessSpec::new(cfg.process)?;
    let threshold = spec.marginal().inv_cdf(cfg.level)?;
    let transform = Transform::Indicator { threshold };
    let eps_grid = cfg
        .eps
        .unwrap_or_else(|| default_eps_grid(&spec, transform, cfg.n));
    let table = bound_vs_montecarlo(&BoundExperiment {
        spec: &spec,
        transform,
        n: cfg.n,
        beta: cfg.beta,
        eps_grid,
        reps: cfg.reps,
        seed: cfg.seed,
        rounding: cfg.rounding,
    })?;
    if table.flagged() > 0 {
        eprintln!(
            "warning: simulated tail exceeds the bound in {} of {} cells",
            table.flagged(),
            table.rows.len()
        );
    }
    let report = Report::Bounds { table };
    output(args.out.as_deref(), &report.render(args.format.into())?)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Prices,
    Returns,
}

#[derive(Debug, clap::Args)]
struct VarArgs {
    /// One value per line; an optional header line is skipped.
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    #[arg(long, value_enum, default_value = "prices")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn var(args: VarArgs) -> Result<()> {
    let series = read_series(&args.input)?;
    let kind = match args.mode {
        ModeArg::Prices => SeriesKind::Prices,
        ModeArg::Returns => SeriesKind::Returns,
    };
    let estimate = var_estimate(&series, args.p, kind)?;
    if let Some(w) = &estimate.warning {
        eprintln!("warning: {w}");
    }
    let report = Report::Var { estimate };
    output(args.out.as_deref(), &report.render(args.format.into())?)
}

#[derive(Debug, clap::Args)]
struct ReportArgs {
    /// JSON report written by `rates`, `bounds` or `var`.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let report = Report::from_json(&text)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    output(args.out.as_deref(), &report.render(args.format.into())?)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("{THREADS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Rates(a) => rates(a),
        Command::Bounds(a) => bounds(a),
        Command::Var(a) => var(a),
        Command::Report(a) => report(a),
    }
}
