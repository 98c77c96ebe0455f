//! Batch front end for the `rankfield` library.
//!
//! Each subcommand reads files, delegates to the library and writes its
//! outputs atomically; [`run`] returns the one-line JSON summary that the
//! binary prints.

mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rankfield::{Grid, WeightFunction};

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rankfield", version, about = "Persistent rank functions of spatial point patterns")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-pattern work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Rank-function grid as `a0,a1,M`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Weight function: `indicator` or `exp:<rate>`.
    #[arg(long, global = true)]
    pub phi: Option<String>,
    /// Homology dimension.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw patterns from a point-process model into `pattern_<index>.csv`.
    Simulate {
        /// Process spec as inline JSON, e.g. `{"kind":"binomial","n":100}`.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Alpha-filtration persistence diagrams of pattern files.
    Persist {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Rank functions of diagram files on the grid.
    Rank {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write a gnuplot matrix per function.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Pointwise mean of rank-function files.
    Mean {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        gnuplot: bool,
    },
    /// Functional PCA of rank-function files.
    Pca {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Components to keep; all nonzero ones by default.
        #[arg(long, short = 'r')]
        components: Option<usize>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        gnuplot: bool,
    },
    /// Fit CSR null models (mean rank function and distance cutoff).
    CsrFit {
        #[arg(long)]
        n_mean: Option<usize>,
        #[arg(long)]
        n_null: Option<usize>,
        #[arg(long)]
        n_points: Option<usize>,
        #[arg(long)]
        p_level: Option<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Test rank-function files against a fitted CSR model.
    CsrTest {
        /// Model JSON; its mean is read from `<stem>_mean.csv` next to it.
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fit CSR models and tabulate rejections for several process models.
    Power {
        #[arg(long)]
        n_test: Option<usize>,
        #[arg(long)]
        n_points: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Cut disjoint cubes out of a large point file, rescaled by a mean radius.
    Subsample {
        input: PathBuf,
        /// Cube edge length in input units.
        #[arg(long)]
        cube: f64,
        #[arg(long)]
        count: usize,
        /// Coordinates are divided by this length.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
}

/// Settings shared by all commands after merging flags over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub seed: u64,
    pub grid: Grid,
    pub phi: WeightFunction,
    pub dim: Option<usize>,
    pub jobs: Option<usize>,
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let config = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let grid = match cli.grid.as_deref().or(config.grid.as_deref()) {
            Some(g) => config::parse_grid(g)?,
            None => Grid::unit_square_default(),
        };
        let phi = match cli.phi.as_deref().or(config.phi.as_deref()) {
            Some(p) => config::parse_phi(p)?,
            None => WeightFunction::Indicator,
        };
        let jobs = cli.jobs.or(config.jobs);
        if jobs == Some(0) {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        Ok(Settings {
            seed: cli.seed.or(config.seed).unwrap_or(0),
            dim: cli.dim.or(config.dim),
            jobs,
            grid,
            phi,
            config,
        })
    }

    fn require_dim(&self) -> Result<usize, CliError> {
        self.dim.ok_or_else(|| CliError::Config("--dim is required for this command".into()))
    }
}

/// Runs one command and returns its JSON summary.
pub fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let settings = Settings::resolve(cli)?;
    let start = std::time::Instant::now();
    let mut summary = match settings.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| commands::dispatch(&cli.command, &settings))?,
        None => commands::dispatch(&cli.command, &settings)?,
    };
    summary["seconds"] = serde_json::json!(start.elapsed().as_secs_f64());
    Ok(summary)
}
