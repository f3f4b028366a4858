//! `counterscope`: traffic counter pattern analysis from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use counterscope_core::calendar::DayType;
use counterscope_core::ingest::Direction;
use counterscope_core::profile::Period;

use commands::{Classify, Outcome, PlotRequest};
use config::{FileConfig, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "counterscope",
    version,
    about = "Hourly traffic counter profiling, scoring and clustering"
)]
struct Cli {
    /// TOML file with run settings; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Profile cache path (default: <out>/profiles.csv).
    #[arg(long, global = true, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse counts, apply quality control and write the profile cache.
    Ingest(IngestArgs),
    /// Score profiles and write top-k rankings.
    Score(ScoreArgs),
    /// Cluster one month of profiles.
    Cluster(ClusterArgs),
    /// Draw one counter series as SVG.
    Plot(PlotArgs),
    /// Write a GeoJSON layer of counter points.
    Map(MapArgs),
    /// Generate a synthetic corpus with ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long, value_name = "PATH")]
    counts: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    meta: Option<PathBuf>,
    /// One ISO date per line.
    #[arg(long, value_name = "PATH")]
    holidays: Option<PathBuf>,
    /// Vehicle classes to keep, comma separated.
    #[arg(long, value_name = "LIST")]
    classes: Option<String>,
    /// monthly or day_of_week.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Debug, Args)]
struct ClusterSettings {
    /// kmeans or ward.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    month: Option<u8>,
    /// Fixed cluster count; k-means picks by silhouette when absent.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// raw or percent.
    #[arg(long)]
    scale: Option<String>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    cluster: ClusterSettings,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    counter: String,
    #[arg(long)]
    direction: Direction,
    #[arg(long)]
    daytype: DayType,
    /// Overlay the per-hour baseline.
    #[arg(long)]
    baseline: bool,
    /// Period to draw on top, e.g. 2 or Sat.
    #[arg(long, value_name = "PERIOD")]
    emphasize: Option<Period>,
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MapArgs {
    /// weektag, season or cluster.
    #[arg(long)]
    layer: Option<String>,
    #[arg(long, value_name = "PATH")]
    meta: Option<PathBuf>,
    #[command(flatten)]
    cluster: ClusterSettings,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    preset: Option<String>,
    /// Scenario description in JSON.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
}

impl ClusterSettings {
    fn overrides(&self, c: &mut FileConfig) {
        c.method = self.method.clone();
        c.month = self.month;
        c.k = self.k;
        c.k_min = self.k_min;
        c.k_max = self.k_max;
        c.restarts = self.restarts;
        c.scale = self.scale.clone();
    }
}

impl Cli {
    fn overrides(&self) -> FileConfig {
        let mut c = FileConfig {
            out: self.out.clone(),
            seed: self.seed,
            cache: self.cache.clone(),
            ..FileConfig::default()
        };
        match &self.command {
            Command::Ingest(a) => {
                c.counts = a.counts.clone();
                c.meta = a.meta.clone();
                c.holidays = a.holidays.clone();
                c.classes = a.classes.clone().map(|s| vec![s]);
                c.mode = a.mode.clone();
            }
            Command::Score(a) => c.top_k = a.top_k,
            Command::Cluster(a) => a.cluster.overrides(&mut c),
            Command::Map(a) => {
                c.layer = a.layer.clone();
                c.meta = a.meta.clone();
                a.cluster.overrides(&mut c);
            }
            Command::Synth(a) => {
                c.preset = a.preset.clone();
                c.scenario = a.scenario.clone();
            }
            Command::Plot(_) => {}
        }
        c
    }
}

fn run(cli: &Cli) -> Outcome {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).usage()?,
        None => FileConfig::default(),
    };
    let settings = Settings::resolve(file.merge(cli.overrides())).usage()?;
    log::debug!("settings {settings:?}, hash {}", settings.hash());
    match &cli.command {
        Command::Ingest(_) => commands::ingest(&settings),
        Command::Score(_) => commands::score(&settings),
        Command::Cluster(_) => commands::cluster(&settings),
        Command::Map(_) => commands::map(&settings),
        Command::Synth(_) => commands::synth(&settings),
        Command::Plot(a) => commands::plot(
            &settings,
            &PlotRequest {
                counter: a.counter.clone(),
                direction: a.direction,
                day_type: a.daytype,
                baseline: a.baseline,
                emphasize: a.emphasize,
                output: a.output.clone(),
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
