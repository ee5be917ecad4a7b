use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spatiotex::evaluation::{Algorithm, NMax};
use spatiotex::index::BackendKind;

/// Density-based spatio-textual clustering of geo-tagged posts.
#[derive(Debug, Parser)]
#[command(name = "spatiotex", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster one dataset with one parameter setting and write results.
    #[command(args_override_self = true)]
    Cluster(ClusterArgs),
    /// Evaluate every cell of a parameter grid.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Write a synthetic dataset and matching POI config.
    #[command(args_override_self = true)]
    Gen(GenArgs),
    /// Time DBSTexC under worst-case parameters and fit log-log slopes.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Sorted k-th nearest neighbor distances of the relevant points.
    #[command(args_override_self = true)]
    Knn(KnnArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` file whose keys mirror the long flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Records in CSV or JSON Lines.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the input file extension.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub poi_name: String,
    #[arg(long, allow_hyphen_values = true)]
    pub poi_lat: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub poi_lon: f64,
    /// Substring marking a record as relevant; repeatable.
    #[arg(long = "query", required = true)]
    pub queries: Vec<String>,
    #[arg(long)]
    pub case_insensitive: bool,
    /// Precision threshold for growing the query region.
    #[arg(long, default_value_t = 0.07)]
    pub eta: f64,
    #[arg(long, default_value_t = 500.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 100.0)]
    pub step: f64,
    /// Drop runs of more than this many same-spot posts by one user.
    #[arg(long, default_value_t = 3)]
    pub consecutive_limit: usize,
    #[arg(long)]
    pub keep_consecutive: bool,
    /// Projection origin; defaults to the POI center.
    #[arg(long, allow_hyphen_values = true, requires = "origin_lon")]
    pub origin_lat: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "origin_lat")]
    pub origin_lon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Area exponent; repeatable or comma-separated.
    #[arg(long = "alpha", value_delimiter = ',', default_values_t = [0.0, 0.5, 0.75, 1.0])]
    pub alphas: Vec<f64>,
    /// Fuzzy members below this score count as unclustered.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Raster cell edge for cluster areas, meters.
    #[arg(long, default_value_t = 10.0)]
    pub resolution: f64,
    #[arg(long, default_value_t = BackendKind::KdTree)]
    pub backend: BackendKind,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, default_value_t = Algorithm::Dbstexc)]
    pub algorithm: Algorithm,
    /// Neighborhood radius, meters.
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Integer or `m` for no bound.
    #[arg(long)]
    pub n_max: Option<NMax>,
    #[arg(long)]
    pub n_min1: Option<usize>,
    #[arg(long)]
    pub n_min2: Option<usize>,
    #[arg(long)]
    pub n_max1: Option<NMax>,
    #[arg(long)]
    pub n_max2: Option<NMax>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Repeatable; every algorithm is swept over its grid.
    #[arg(long = "algorithm", value_delimiter = ',', default_values_t = [Algorithm::Dbstexc])]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub n_mins: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_maxs: Vec<NMax>,
    #[arg(long, value_delimiter = ',')]
    pub n_min1s: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_min2s: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_max1s: Vec<NMax>,
    #[arg(long, value_delimiter = ',')]
    pub n_max2s: Vec<NMax>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Relevant blob under an irrelevant crowd plus a clean relevant blob.
    Heterogeneity,
    /// Uniform points over the region.
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Preset::Heterogeneity)]
    pub preset: Preset,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Relevant count for the uniform preset.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Irrelevant count for the uniform preset.
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    /// Overrides the preset's region radius, meters.
    #[arg(long)]
    pub region_radius: Option<f64>,
    #[arg(long, default_value = "Hyde Park")]
    pub poi_name: String,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV of `n,m,regime` rows; defaults to the built-in worst-case sizes.
    #[arg(long)]
    pub sizes: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, default_value_t = BackendKind::LinearScan)]
    pub backend: BackendKind,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct KnnArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short, long, default_value_t = 4)]
    pub k: usize,
}
