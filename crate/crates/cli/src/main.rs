//! `fusebench`: evaluation and fusion toolkit for retouching detection.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 validation failure.

mod commands;
mod demo;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fusebench_core::Error;

#[derive(Parser)]
#[command(name = "fusebench", version, about = "Retouching-detection evaluation and score fusion")]
struct Cli {
    /// Seed for every randomized step; identical seeds give identical runs.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output path (directory for most commands, the config file for `fit`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Progress logging on stderr.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Rgb,
    Dct,
    Srm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Learner {
    Forest,
    Svc,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature tensors from a directory of PNG/PPM images.
    Extract {
        /// Directory scanned for .png and .ppm images.
        #[arg(long)]
        images: PathBuf,
        /// Bounding-box sidecar CSV (`sample_id,x,y,w,h`); required with --crop.
        #[arg(long)]
        boxes: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Method,
        /// Extra margin around the detected face box, e.g. 0 or 100.
        #[arg(long, default_value_t = 0)]
        margin: u32,
        /// Crop each image to its face box before extraction.
        #[arg(long)]
        crop: bool,
    },
    /// Fit fusion weights on a score manifest and save the fusion config.
    Fit {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated source order, e.g. srm,dct,rgb.
        #[arg(long, value_delimiter = ',', required = true)]
        sources: Vec<String>,
        /// Optimization trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Apply a saved fusion config to a new score manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// DET curves (per attack filter) for one source of a manifest.
    Det {
        /// Score manifest JSON.
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        source: String,
    },
    /// Per-filter score statistics and KDE plot for one score CSV.
    BeautyStats {
        /// Score CSV (`sample_id,filter,label,score`).
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        source: String,
    },
    /// ML-based fusion: repeated stratified splits over joined scores.
    MlFuse {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum)]
        learner: Learner,
        #[arg(long, default_value_t = 0.7)]
        train_frac: f64,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Trees in the forest learner.
        #[arg(long, default_value_t = 100)]
        trees: usize,
        /// Regularization of the margin learner.
        #[arg(long, default_value_t = 1e-3)]
        regularization: f64,
        /// Training epochs of the margin learner.
        #[arg(long, default_value_t = 30)]
        epochs: usize,
    },
    /// End-to-end synthetic pipeline: images, retouch filters, features,
    /// detectors, fusion fitting, and a full report directory.
    Demo {
        #[arg(long, default_value_t = 50)]
        n_subjects: usize,
    },
}

fn exit_code(error: &Error) -> u8 {
    if error.is_io() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = cli.verbose;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            let mut source = std::error::Error::source(&error);
            while let Some(cause) = source {
                if verbose {
                    eprintln!("  caused by: {cause}");
                }
                source = cause.source();
            }
            ExitCode::from(exit_code(&error))
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let ctx = commands::Context {
        seed: cli.seed,
        out: cli.out,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Extract {
            images,
            boxes,
            method,
            margin,
            crop,
        } => commands::extract(&ctx, &images, boxes.as_deref(), method, margin, crop),
        Command::Fit {
            manifest,
            sources,
            trace,
        } => commands::fit(&ctx, &manifest, &sources, trace.as_deref()),
        Command::Eval { manifest, config } => commands::eval(&ctx, &manifest, &config),
        Command::Det { scores, source } => commands::det(&ctx, &scores, &source),
        Command::BeautyStats { scores, source } => commands::beauty_stats(&ctx, &scores, &source),
        Command::MlFuse {
            manifest,
            learner,
            train_frac,
            repeats,
            trees,
            regularization,
            epochs,
        } => commands::ml_fuse(
            &ctx,
            &manifest,
            learner,
            train_frac,
            repeats,
            trees,
            regularization,
            epochs,
        ),
        Command::Demo { n_subjects } => demo::run(&ctx, n_subjects),
    }
}
