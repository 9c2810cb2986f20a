use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use projgrowth_core::estimators::{Variant, DEFAULT_MIN_PER_BIN, DEFAULT_WINDOW_MONTHS};
use projgrowth_core::gof::DEFAULT_BOOTSTRAP;
use projgrowth_core::snapshot::{Month, ParseOptions};

#[derive(Debug, Parser)]
#[command(name = "projgrowth", version, about = "Simulate and analyze the growth of project communities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the growth process and write traces and the replica-averaged distribution.
    Simulate(SimulateArgs),
    /// Monthly summaries, distributions, entry/exit counts and growth rates of an event log.
    Analyze(AnalyzeArgs),
    /// Maximum-likelihood Yule-Simon fit.
    Fit(FitArgs),
    /// Bootstrap Kolmogorov-Smirnov goodness of fit.
    Gof(GofArgs),
    /// EM correction of the singleton class.
    Em(EmArgs),
    /// Monthly founding probability series.
    P0(P0Args),
    /// Iterate the rate equations for the expected size distribution.
    Rateeq(RateeqArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Analyze(_) => "analyze",
            Command::Fit(_) => "fit",
            Command::Gof(_) => "gof",
            Command::Em(_) => "em",
            Command::P0(_) => "p0",
            Command::Rateeq(_) => "rateeq",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Simulate(a) => &a.common,
            Command::Analyze(a) => &a.common,
            Command::Fit(a) => &a.common,
            Command::Gof(a) => &a.common,
            Command::Em(a) => &a.common,
            Command::P0(a) => &a.common,
            Command::Rateeq(a) => &a.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory for output tables and the run manifest.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Worker threads for replicas and bootstrap (output does not depend on it).
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// `a:b`, both ends inclusive; each end an integer month or `YYYY-MM`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonthSpan {
    pub start: String,
    pub end: String,
}

impl std::str::FromStr for MonthSpan {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // a leading '-' belongs to a negative start month
        let split = s.char_indices().skip(1).find(|&(_, c)| c == ':').map(|(i, _)| i);
        let i = split.ok_or_else(|| format!("expected START:END, got {s:?}"))?;
        Ok(Self { start: s[..i].to_string(), end: s[i + 1..].to_string() })
    }
}

impl MonthSpan {
    pub fn resolve(&self, opts: &ParseOptions) -> Result<RangeInclusive<Month>, String> {
        let a = opts.parse_month(&self.start).ok_or_else(|| format!("bad month {:?}", self.start))?;
        let b = opts.parse_month(&self.end).ok_or_else(|| format!("bad month {:?}", self.end))?;
        if a > b {
            return Err(format!("empty month range {a}:{b}"));
        }
        Ok(a..=b)
    }
}

#[derive(Debug, Args)]
pub struct EventFormat {
    /// Field delimiter of event files.
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Calendar month mapped to index 0 when months are written YYYY-MM.
    #[arg(long, default_value = "1970-01")]
    pub epoch: String,
}

impl EventFormat {
    pub fn options(&self) -> Result<ParseOptions, String> {
        if !self.delimiter.is_ascii() {
            return Err(format!("delimiter must be a single ASCII character, got {:?}", self.delimiter));
        }
        let bad = || format!("epoch must be YYYY-MM, got {:?}", self.epoch);
        let (y, m) = self.epoch.split_once('-').ok_or_else(bad)?;
        let epoch_year: i32 = y.parse().map_err(|_| bad())?;
        let epoch_month: u32 = m.parse().map_err(|_| bad())?;
        if !(1..=12).contains(&epoch_month) {
            return Err(bad());
        }
        Ok(ParseOptions { delimiter: self.delimiter as u8, epoch_year, epoch_month })
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p0: f64,
    /// Number of arriving developers per run.
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    #[arg(long)]
    pub seed: u64,
    /// Steps at which to record the distribution (comma-separated); the last step by default.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
    /// Also write replica 0 as an event file, this many arrivals per month.
    #[arg(long)]
    pub events_per_month: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Event file: developer_id,project_id,entry_month[,exit_month].
    pub events: PathBuf,
    /// Restrict output to START:END.
    #[arg(long)]
    pub months: Option<MonthSpan>,
    /// File listing months to exclude from estimation, one per line.
    #[arg(long)]
    pub gap_mask: Option<PathBuf>,
    /// Window for the size-dependent growth fit.
    #[arg(long, default_value_t = DEFAULT_WINDOW_MONTHS)]
    pub window: u32,
    #[arg(long, default_value_t = DEFAULT_MIN_PER_BIN)]
    pub min_per_bin: usize,
    #[command(flatten)]
    pub format: EventFormat,
    #[command(flatten)]
    pub common: Common,
}

/// A size distribution from a file, or the project sizes of an event log.
#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct SizeSource {
    /// Sizes, one per line, or `size,count` rows.
    #[arg(long)]
    pub distribution: Option<PathBuf>,
    /// Event file; project sizes are taken per month.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonthChoice {
    /// Single month of an event log (the last month by default).
    #[arg(long, conflicts_with = "months")]
    pub month: Option<String>,
    /// Month range START:END of an event log.
    #[arg(long)]
    pub months: Option<MonthSpan>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: SizeSource,
    #[command(flatten)]
    pub choice: MonthChoice,
    /// Fit only sizes >= this value, conditioning on the truncation.
    #[arg(long, default_value_t = 1)]
    pub min_size: u64,
    #[command(flatten)]
    pub format: EventFormat,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[command(flatten)]
    pub source: SizeSource,
    #[command(flatten)]
    pub choice: MonthChoice,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long)]
    pub seed: u64,
    /// Report (k+1)/(B+1) instead of k/B.
    #[arg(long)]
    pub plus_one: bool,
    #[command(flatten)]
    pub format: EventFormat,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EmArgs {
    #[command(flatten)]
    pub source: SizeSource,
    #[command(flatten)]
    pub choice: MonthChoice,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Non-collaborative singletons before the first month (predicted entries).
    #[arg(long, default_value_t = 0.0)]
    pub initial_non_collaborative: f64,
    #[arg(long)]
    pub gap_mask: Option<PathBuf>,
    #[command(flatten)]
    pub format: EventFormat,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    All,
    Collaborative,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::All => Variant::All,
            VariantArg::Collaborative => Variant::Collaborative,
        }
    }
}

#[derive(Debug, Args)]
pub struct P0Args {
    pub events: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub variant: VariantArg,
    #[arg(long)]
    pub months: Option<MonthSpan>,
    #[arg(long)]
    pub gap_mask: Option<PathBuf>,
    /// Last observed month for the collaborative classification (the log's last month by default).
    #[arg(long)]
    pub observation_end: Option<String>,
    /// Censor horizon in days (the fitted mean wait by default).
    #[arg(long)]
    pub horizon_days: Option<f64>,
    /// Birth months START:END of the inter-arrival cohort (all months by default).
    #[arg(long)]
    pub cohort: Option<MonthSpan>,
    #[command(flatten)]
    pub format: EventFormat,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RateeqArgs {
    #[arg(long)]
    pub p0: f64,
    /// Number of steps N to iterate.
    #[arg(long)]
    pub steps: u64,
    /// Steps to record (comma-separated); the last step by default.
    #[arg(long, value_delimiter = ',')]
    pub record: Vec<u64>,
    /// Largest size written to the tables.
    #[arg(long, default_value_t = 50)]
    pub max_x: u64,
    /// Size support of the iteration; mass beyond it goes to an overflow bin.
    #[arg(long, default_value_t = 1000)]
    pub x_trunc: usize,
    #[command(flatten)]
    pub common: Common,
}
