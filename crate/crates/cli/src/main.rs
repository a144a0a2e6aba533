//! `mcbp` command-line driver.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! malformed input), 3 pipeline error.

mod commands;
mod config;
mod svg;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcbp::bench::{Axis, ScalingConfig};

use config::{parse_formats, parse_usize_list, Overrides, RunConfig, DEFAULT_OUT_DIR, OUT_DIR_ENV};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(mcbp::Error),
    #[error("{0}")]
    Pipeline(mcbp::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl From<mcbp::Error> for CliError {
    fn from(e: mcbp::Error) -> Self {
        if e.is_data_error() {
            CliError::Data(e)
        } else {
            CliError::Pipeline(e)
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Pipeline(_) | CliError::Output(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mcbp",
    version,
    about = "Curvature-based boundary point filtering and clustering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every point and flag boundary points.
    Curvature(DataArgs),
    /// Run clustering protocols and write a comparison table.
    Experiment(DataArgs),
    /// Write synthetic datasets with a provenance sidecar.
    Synth(DataArgs),
    /// Time the neighbor search and curvature stages over a grid.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV file; repeat for several datasets.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Synthetic generator, e.g. `moons:n=1000,noise=0.1`.
    #[arg(long)]
    generator: Option<String>,
    /// Neighborhood size (default ⌊log₂ n⌋).
    #[arg(long)]
    k: Option<usize>,
    /// Boundary percentile in (0, 1).
    #[arg(long)]
    p: Option<f64>,
    /// HDBSCAN min_cluster_size candidates, comma separated.
    #[arg(long)]
    mcs: Option<String>,
    /// Seeds: `0..20`, `1..=5`, or a comma list.
    #[arg(long)]
    seeds: Option<String>,
    /// Experiment strategies, comma separated, or `all`.
    #[arg(long)]
    strategy: Option<String>,
    /// Output directory (falls back to $MCBP_OUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any of csv, json, svg.
    #[arg(long)]
    formats: Option<String>,
    /// Flat `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Header name or zero-based index of the class label column.
    #[arg(long)]
    label_column: Option<String>,
    /// The input files have no header row.
    #[arg(long)]
    no_header: bool,
    /// Standardize features first (the default for `experiment`).
    #[arg(long, conflicts_with = "no_standardize")]
    standardize: bool,
    /// Use features as given.
    #[arg(long)]
    no_standardize: bool,
    /// Number of k-means clusters (default: the class count).
    #[arg(long)]
    clusters: Option<usize>,
}

impl DataArgs {
    fn resolve(self, default_standardize: bool) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => config::read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let standardize = match (self.standardize, self.no_standardize) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        let overrides = Overrides {
            input: self.input,
            generator: self.generator,
            k: self.k,
            p: self.p,
            mcs: self.mcs,
            seeds: self.seeds,
            strategy: self.strategy,
            out: self.out,
            formats: self.formats,
            label_column: self.label_column,
            no_header: self.no_header,
            standardize,
            clusters: self.clusters,
        };
        let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
        RunConfig::resolve(&file, overrides, env_out, default_standardize)
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Swept axis: n or m.
    #[arg(long, default_value = "n")]
    axis: String,
    /// Grid values, comma separated.
    #[arg(long, default_value = "1000,2000,4000,8000")]
    grid: String,
    /// Sample count when sweeping m.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Dimension when sweeping n.
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    /// Worker threads for the curvature stage.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv,json")]
    formats: String,
}

impl BenchArgs {
    fn resolve(self) -> Result<(ScalingConfig, PathBuf, Vec<config::Format>), CliError> {
        let axis = match self.axis.as_str() {
            "n" => Axis::N,
            "m" => Axis::M,
            other => return Err(CliError::Usage(format!("axis must be n or m, got '{other}'"))),
        };
        let out = self
            .out
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let cfg = ScalingConfig {
            axis,
            grid: parse_usize_list("grid", &self.grid)?,
            n: self.n,
            m: self.m,
            k: self.k,
            repetitions: self.repetitions,
            threads: self.threads,
            seed: self.seed,
        };
        Ok((cfg, out, parse_formats(&self.formats)?))
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::Curvature(a) => commands::cmd_curvature(&a.resolve(false)?),
        Command::Experiment(a) => commands::cmd_experiment(&a.resolve(true)?),
        Command::Synth(a) => commands::cmd_synth(&a.resolve(false)?),
        Command::Bench(a) => {
            let (cfg, out, formats) = a.resolve()?;
            commands::cmd_bench(&cfg, &out, &formats)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
