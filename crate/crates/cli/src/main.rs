use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::*;

/// Vessel morphometry and segmentation-bias toolkit.
#[derive(Debug, Parser)]
#[command(name = "vesselmorph", version, about)]
struct Cli {
    /// JSON object of parameters; keys are the long flag names.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Binarize an image (or the projection of several slices).
    Segment(SegmentArgs),
    /// Thin a mask to its centerline and decompose it into segments.
    Skeletonize(SkeletonizeArgs),
    /// Per-pixel centerline tortuosity of a mask.
    Tortuosity(TortuosityArgs),
    /// Elastic deformation of an image/mask pair.
    Augment(AugmentArgs),
    /// Render synthetic vessel phantoms.
    Synth(SynthArgs),
    /// IoU and Dice between two mask directories.
    Metrics(MetricsArgs),
    /// Rank labeled images, cut windows and split them.
    Prepare(PrepareArgs),
    /// Fine-tuning sweep against a segmentation backend.
    Sweep(SweepArgs),
    /// Redraw the sweep plot from aggregates.csv.
    Plot(PlotArgs),
    /// Serve one backend job with a built-in backend.
    #[command(hide = true)]
    Backend(BackendArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(vesselmorph::Error),
}

impl From<vesselmorph::Error> for CliError {
    fn from(e: vesselmorph::Error) -> Self {
        CliError::Domain(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("error: usage: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: usage: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {}: {}", e.code(), single_line(&e));
            ExitCode::from(1)
        }
    }
}

fn single_line(e: &vesselmorph::Error) -> String {
    e.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let cfg = cli.config.as_deref();
    match cli.command {
        Cmd::Segment(a) => segment(&config::merge(&a, cfg)?),
        Cmd::Skeletonize(a) => skeletonize(&config::merge(&a, cfg)?),
        Cmd::Tortuosity(a) => tortuosity(&config::merge(&a, cfg)?),
        Cmd::Augment(a) => augment(&config::merge(&a, cfg)?),
        Cmd::Synth(a) => synth(&config::merge(&a, cfg)?),
        Cmd::Metrics(a) => metrics(&config::merge(&a, cfg)?),
        Cmd::Prepare(a) => prepare(&config::merge(&a, cfg)?),
        Cmd::Sweep(a) => sweep(&config::merge(&a, cfg)?),
        Cmd::Plot(a) => plot(&config::merge(&a, cfg)?),
        Cmd::Backend(a) => backend(&a),
    }
}
