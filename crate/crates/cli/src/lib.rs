//! `kyc`: batch front end over `kyc_core`.
//!
//! Exit codes: 0 success, 1 data errors (each printed as
//! `file:line: id: message`, then a count), 2 usage or configuration error.
//! Worker threads are bounded by `KYC_THREADS`.

mod cmd;
mod decode;
mod diag;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use decode::decode_image;

#[derive(Debug, Parser)]
#[command(name = "kyc", version, about = "Multimodal dataset curation toolkit")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perceptual hashes for a JSONL list of images.
    Hash(HashArgs),
    /// Build a MinHash LSH index from hash records.
    Index(IndexArgs),
    /// Flag training samples that duplicate indexed benchmark images.
    Dedup(DedupArgs),
    /// Flag training records by embedding similarity to benchmark records.
    DecontamEmbed(EmbedArgs),
    /// Split scored pairs at a strict threshold.
    FilterPairs(PairArgs),
    /// Grounding label validation and conversion.
    #[command(subcommand)]
    Grounding(GroundingCmd),
    /// Vision token budget plans.
    #[command(subcommand)]
    Budget(BudgetCmd),
    /// First-fit-decreasing sequence packing.
    Pack(PackArgs),
    /// Greedy cost balancing across parallel groups.
    Balance(BalanceArgs),
    /// Resume cursor tools.
    #[command(subcommand)]
    Cursor(CursorCmd),
    /// Weighted average of parameter containers.
    Merge(MergeArgs),
}

#[derive(Debug, Args)]
pub struct ShardArgs {
    #[arg(long, default_value_t = 1)]
    pub shard_count: u64,
    #[arg(long, default_value_t = 0)]
    pub shard_index: u64,
}

#[derive(Debug, Args)]
pub struct HashArgs {
    /// JSONL of `{"image_id", "path"}`; relative paths resolve against this file.
    #[arg(long)]
    pub images: PathBuf,
    /// JSONL of `{"image_id", "phash", "ones"}`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shard: ShardArgs,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub hashes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub bands: usize,
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    /// Sample manifest with train and benchmark entries.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Hash records covering every training image.
    #[arg(long)]
    pub hashes: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    /// JSONL of flagged samples.
    #[arg(long)]
    pub flags: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub report_format: ReportFormatArg,
    #[command(flatten)]
    pub shard: ShardArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    And,
    Or,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// JSONL or `KYEM1` binary.
    #[arg(long)]
    pub train: PathBuf,
    /// JSONL or `KYEM1` binary.
    #[arg(long)]
    pub bench: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.98)]
    pub image_threshold: f64,
    #[arg(long, default_value_t = 0.50)]
    pub text_threshold: f64,
    #[arg(long, value_enum, default_value = "and")]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// JSONL of `{"id", "score"}`.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub kept: PathBuf,
    #[arg(long)]
    pub dropped: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub threshold: f64,
}

#[derive(Debug, Subcommand)]
pub enum GroundingCmd {
    /// Check label strings or structured records; one diagnostic per bad line.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Pixel-space records to normalized annotation records.
    Normalize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structured annotation records to `{"sample_id", "label"}` lines.
    Emit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct BudgetOverrides {
    #[arg(long)]
    pub patch: Option<u32>,
    #[arg(long)]
    pub merge: Option<u32>,
    #[arg(long)]
    pub image_cap: Option<u64>,
    #[arg(long)]
    pub frame_min: Option<u64>,
    #[arg(long)]
    pub frame_max: Option<u64>,
    #[arg(long)]
    pub video_cap: Option<u64>,
    #[arg(long)]
    pub tick: Option<f64>,
    #[arg(long)]
    pub base_fps: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum BudgetCmd {
    Image {
        #[arg(long)]
        width: u64,
        #[arg(long)]
        height: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: BudgetOverrides,
    },
    Video {
        /// Seconds.
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        width: u64,
        #[arg(long)]
        height: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: BudgetOverrides,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CostModeArg {
    Linear,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Cost for items without an explicit `cost`.
    #[arg(long, value_enum, default_value = "linear")]
    pub cost_mode: CostModeArg,
    /// Context length for the quadratic cost.
    #[arg(long, default_value_t = 0)]
    pub ctx: u64,
}

#[derive(Debug, Args)]
pub struct PackArgs {
    /// JSONL of `{"id", "tokens", "cost"?}`.
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long)]
    pub capacity: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cost: CostArgs,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    /// JSONL of `{"id", "tokens", "cost"?}`.
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long)]
    pub groups: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cost: CostArgs,
}

#[derive(Debug, Subcommand)]
pub enum CursorCmd {
    /// Print a cursor file as JSON.
    Inspect { path: PathBuf },
    /// Check integrity and, with `--shards`, bounds against shard sizes.
    Verify {
        path: PathBuf,
        /// Comma-separated sample counts per shard.
        #[arg(long, value_delimiter = ',')]
        shards: Vec<u64>,
    },
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// `KYPM1` containers; repeat the flag per model.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Comma-separated non-negative weights, one per input.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("KYC_THREADS") else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n >= 1 => n,
        _ => bail!("KYC_THREADS must be a positive integer, got {raw:?}"),
    };
    // a pool from an earlier in-process run is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Returns the number of data errors.
pub fn execute(cli: Cli) -> Result<usize> {
    configure_threads()?;
    let seed = cli.seed;
    match cli.command {
        Command::Hash(a) => cmd::hash::run(&a),
        Command::Index(a) => cmd::dedup::index(&a, seed),
        Command::Dedup(a) => cmd::dedup::dedup(&a, seed),
        Command::DecontamEmbed(a) => cmd::embed::run(&a),
        Command::FilterPairs(a) => cmd::embed::filter_pairs(&a),
        Command::Grounding(c) => cmd::grounding::run(&c),
        Command::Budget(c) => cmd::budget::run(&c),
        Command::Pack(a) => cmd::pack::pack(&a),
        Command::Balance(a) => cmd::pack::balance(&a),
        Command::Cursor(c) => cmd::pack::cursor(&c),
        Command::Merge(a) => cmd::merge::run(&a),
    }
}

/// Parses `argv` (program name first) and runs it, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(0) => 0,
        Ok(n) => {
            eprintln!("{n} data error(s)");
            1
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
