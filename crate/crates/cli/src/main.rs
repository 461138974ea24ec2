//! `rdh`: boundary-pixel preprocessing, reversible embedding and corpus
//! analysis for 8-bit PGM images.
//!
//! Exit codes: 0 success, 2 validation, 3 capacity, 4 corruption, 5 I/O.

mod commands;
mod report;
mod sidecar;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdh_core::{Error, ErrorClass};

#[derive(Parser)]
#[command(name = "rdh", version, about = "Reversible data embedding for covers full of boundary pixels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// Boundary half-width T.
    #[arg(long = "T", default_value_t = 1)]
    t: u8,
    /// Threshold for the even-class pass.
    #[arg(long, default_value_t = 1)]
    t0: u8,
    /// Threshold for the odd-class pass.
    #[arg(long, default_value_t = 4)]
    t1: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Preprocess a cover into a boundary-free image and a location map.
    Preprocess {
        input: PathBuf,
        output: PathBuf,
        map: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Rebuild the original cover from a preprocessed image and its map.
    Restore { input: PathBuf, map: PathBuf, output: PathBuf },
    /// Embed a payload file into a cover.
    Embed {
        input: PathBuf,
        payload: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Pick t0 and t1 by sweeping for the largest capacity.
        #[arg(long, conflicts_with_all = ["t0", "t1"])]
        auto: bool,
        /// Thresholds searched by --auto.
        #[arg(long, value_delimiter = ',', default_values_t = commands::default_thresholds())]
        thresholds: Vec<u8>,
        /// Embed only the first N bits of the payload file.
        #[arg(long)]
        bits: Option<usize>,
    },
    /// Recover the payload and the original cover from a marked image.
    Extract { input: PathBuf, payload: PathBuf, output: PathBuf },
    /// Measure boundary counts, map sizes and capacity over a directory of PGM files.
    Analyze {
        corpus: PathBuf,
        csv: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Evaluate the full t0 x t1 grid instead of one parameter pair.
        #[arg(long)]
        sweep: bool,
        #[arg(long, value_delimiter = ',', default_values_t = commands::default_thresholds())]
        thresholds: Vec<u8>,
        /// Also write the rows as a JSON array.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write before/after location maps as PGM (flagged pixels white).
        #[arg(long)]
        maps: Option<PathBuf>,
        /// Write the joint histogram of (pixel, prediction) pairs as CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Write a deterministic synthetic corpus with a manifest.
    GenFixtures {
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sizes of the mixed-kind covers, as WxH.
        #[arg(long, value_delimiter = ',', default_values_t = ["2x2".to_string(), "7x5".into(), "64x64".into(), "256x256".into()])]
        sizes: Vec<String>,
        /// Number of boundary-heavy covers.
        #[arg(long, default_value_t = 50)]
        heavy: usize,
        #[arg(long, default_value = "128x128")]
        heavy_size: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    /// Already reported per item.
    #[error("{count} input(s) skipped")]
    Skipped { count: usize, code: u8 },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Capacity => 3,
                ErrorClass::Corruption => 4,
            },
            CliError::Io { .. } => 5,
            CliError::Usage(_) => 2,
            CliError::Skipped { code, .. } => *code,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess { input, output, map, params } => commands::preprocess(&input, &output, &map, params),
        Command::Restore { input, map, output } => commands::restore(&input, &map, &output),
        Command::Embed { input, payload, output, params, auto, thresholds, bits } => {
            commands::embed(&input, &payload, &output, params, auto.then_some(thresholds.as_slice()), bits)
        }
        Command::Extract { input, payload, output } => commands::extract(&input, &payload, &output),
        Command::Analyze { corpus, csv, params, sweep, thresholds, json, maps, histogram } => commands::analyze(
            &corpus,
            &csv,
            params,
            sweep.then_some(thresholds.as_slice()),
            json.as_deref(),
            maps.as_deref(),
            histogram.as_deref(),
        ),
        Command::GenFixtures { out, seed, sizes, heavy, heavy_size } => {
            commands::gen_fixtures(&out, seed, &sizes, heavy, &heavy_size)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
