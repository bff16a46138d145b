//! Command-line driver: synthetic data, training, grid search, method
//! comparison, GeoJSON export and point queries.

pub mod commands;
pub mod config;
pub mod error;
mod io;

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use covmap_core::boundary::FrameChoice;
use covmap_core::evaluation::NegativePolicy;
use covmap_core::measurements::TrainingMode;

pub use commands::{MethodName, ShapeKind};
pub use config::{FileConfig, Resolver};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "covmap", version, about = "Coverage boundaries from crowdsourced signal measurements")]
pub struct Cli {
    /// key=value configuration file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent (cell, band) jobs; 0 uses every core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled synthetic measurement CSV and scenario sidecar.
    Synth(SynthArgs),
    /// Train one boundary per trainable (cell, band).
    Train(TrainArgs),
    /// Exhaustive (nu, gamma) search scored by validation F1.
    GridSearch(GridArgs),
    /// Hull versus tuned OC-SVM per band on a temporal split.
    Compare(GridArgs),
    /// Write trained boundaries as a GeoJSON FeatureCollection.
    Export(ExportArgs),
    /// Strongest band predicted at a lon/lat point.
    Query(QueryArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// disk, annulus, crescent or multi_blob.
    #[arg(long)]
    pub shape: Option<ShapeKind>,
    /// Disk, crescent or blob radius in degrees.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub r_in: Option<f64>,
    #[arg(long)]
    pub r_out: Option<f64>,
    #[arg(long)]
    pub bite_radius: Option<f64>,
    /// Crescent bite centre offset along longitude, in degrees.
    #[arg(long, allow_negative_numbers = true)]
    pub offset: Option<f64>,
    /// Number of blobs for multi_blob.
    #[arg(long)]
    pub blobs: Option<usize>,
    /// Distance of blob centres from the cell centre, in degrees.
    #[arg(long)]
    pub spread: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub center_lon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub center_lat: Option<f64>,
    #[arg(long)]
    pub n_service: Option<usize>,
    #[arg(long)]
    pub n_noservice: Option<usize>,
    /// Number of cells, placed side by side with consecutive seeds.
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = config::parse_instant)]
    pub start: Option<DateTime<Utc>>,
    #[arg(long, value_parser = config::parse_instant)]
    pub end: Option<DateTime<Utc>>,
    /// GPS noise standard deviation in degrees.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Share of no-service points placed in interior holes.
    #[arg(long)]
    pub hole_fraction: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Input and partitioning options shared by the data-driven commands.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Measurement CSV files (repeat or comma-separate).
    #[arg(long, value_delimiter = ',')]
    pub input: Option<Vec<PathBuf>>,
    /// partition or cumulative.
    #[arg(long)]
    pub mode: Option<TrainingMode>,
    #[arg(long)]
    pub min_points: Option<usize>,
    /// degrees or projected.
    #[arg(long = "coordinate-mode")]
    pub frame: Option<FrameChoice>,
    /// Temporal split instant (RFC 3339 or YYYY-MM-DD).
    #[arg(long, value_parser = config::parse_instant)]
    pub split: Option<DateTime<Utc>>,
    /// Solver stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Solver cap in passes of n pair updates.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// ocsvm or hull.
    #[arg(long)]
    pub method: Option<MethodName>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// best_params.json from grid-search; supplies nu and gamma when they
    /// are not set by flag or config file.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub nu_grid: Option<Vec<f64>>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
    /// no-service-and-other-bands or no-service-only.
    #[arg(long)]
    pub negatives: Option<NegativePolicy>,
    /// Search each cell separately instead of pooling all cells.
    #[arg(long)]
    pub per_cell: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Directory of model files, or a train output directory.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// min_lon,min_lat,max_lon,max_lat for OC-SVM contours.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub bbox: Option<Vec<f64>>,
    /// Contour grid cells per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Output GeoJSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Directory of model files, or a train output directory.
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub lon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lat: Option<f64>,
    /// Restrict to one cell.
    #[arg(long)]
    pub cell: Option<String>,
    /// Restrict to one method when both are present.
    #[arg(long)]
    pub method: Option<MethodName>,
}

/// Runs a parsed command line and returns what it printed to stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut resolver = Resolver::new(&file);
    let jobs = resolver.get("jobs", cli.jobs, 0usize)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Domain(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Synth(a) => commands::synth(a, &mut resolver),
        Command::Train(a) => commands::train(a, &mut resolver),
        Command::GridSearch(a) => commands::grid_search(a, &mut resolver),
        Command::Compare(a) => commands::compare(a, &mut resolver),
        Command::Export(a) => commands::export(a, &mut resolver),
        Command::Query(a) => commands::query(a, &mut resolver),
    })
}
