use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use volmodel::pipeline::{self, VariantSelection};
use volmodel::{report, synth, Error, RunConfig};

#[derive(Parser)]
#[command(
    name = "volmodel",
    version,
    about = "Fit and rank heavy-tailed volume-price models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit all four models per window and write ranking artifacts.
    Fit(FitArgs),
    /// Generate a synthetic snapshot stream from a JSON spec.
    Synth(SynthArgs),
    /// Print rank matrices and distance statistics of a finished run.
    Report {
        /// Run directory written by `fit`.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Snapshot CSV (optionally gzip-compressed).
    #[arg(long)]
    input: PathBuf,
    /// Output directory for artifacts.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    window_minutes: u32,
    #[arg(long, default_value_t = 8)]
    bins_per_decade: usize,
    #[arg(long, default_value_t = 32)]
    min_samples: usize,
    /// standard, tail or both.
    #[arg(long, default_value = "both")]
    variant: VariantSelection,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for fit restarts.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON spec file.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for snapshots.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
}

fn fit(args: FitArgs) -> volmodel::Result<()> {
    let mut config = RunConfig::new(args.input, args.out);
    config.window_minutes = args.window_minutes;
    config.bins_per_decade = args.bins_per_decade;
    config.min_samples = args.min_samples;
    config.variants = args.variant;
    config.jobs = args.jobs;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    match pipeline::run(&config) {
        Ok((summary, _)) => {
            print!("{}", summary.render());
            Ok(())
        }
        Err(e @ Error::NoFittedWindows { .. }) => {
            if let Ok(summary) = volmodel::export::read_summary(&config.out) {
                print!("{}", summary.render());
            }
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn synth(args: SynthArgs) -> volmodel::Result<()> {
    let mut spec = synth::load_spec(&args.input)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let out = synth::generate(&spec)?;
    synth::write_synth(&args.out, &out)?;
    println!(
        "wrote {} windows x {} samples to {}",
        out.windows.len(),
        spec.samples_per_window,
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VOLMODEL_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => fit(args),
        Command::Synth(args) => synth(args),
        Command::Report { dir } => report::render(&dir).map(|text| print!("{text}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            if e.is_empty_result() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
