//! Command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cirsense::commands::{cmd_eval, cmd_pca, cmd_pipeline, cmd_simulate};
use cirsense::conf::{Overrides, RunConfig};
use cirsense::error::AppError;

#[derive(Parser)]
#[command(
    name = "cirsense",
    about = "Through-the-wall sensing experiments on burst channel estimates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Run configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Event to run: `a` (person detection, 40-value frames) or `b`
    /// (weapon detection, 48-value frames).
    #[arg(long)]
    event: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Capture seed for set 1.
    #[arg(long)]
    seed_set1: Option<u64>,
    /// Capture seed for set 2.
    #[arg(long)]
    seed_set2: Option<u64>,
    /// Capture seed for set 3.
    #[arg(long)]
    seed_set3: Option<u64>,
    /// Frames per scenario per set.
    #[arg(long)]
    frames_per_set: Option<usize>,
    /// Receiver SNR in dB, overriding the scenario file.
    #[arg(long)]
    snr_db: Option<f64>,
    /// SVM penalty parameter.
    #[arg(long)]
    svm_c: Option<f64>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, AppError> {
        let overrides = Overrides {
            event: self.event.clone(),
            out: self.out.clone(),
            seed_set: [self.seed_set1, self.seed_set2, self.seed_set3],
            frames_per_set: self.frames_per_set,
            snr_db: self.snr_db,
            svm_c: self.svm_c,
        };
        let (cfg, warnings) = RunConfig::resolve(self.config.as_deref(), &overrides)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the event's three sets into nine frame files.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Export scree data and a low-dimensional cluster projection.
    Pca {
        #[command(flatten)]
        common: CommonArgs,
        /// The three scenario frame files of one set (defaults to set 1 in
        /// the output directory).
        files: Vec<PathBuf>,
    },
    /// Train on two sets, test on the held-out set, report the confusion
    /// matrix.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Case to evaluate (1-3 for event a, 4-6 for event b).
        #[arg(long)]
        case: u8,
        /// The event's nine frame files (defaults to the output directory).
        files: Vec<PathBuf>,
    },
    /// Simulate, export PCA data, and evaluate all three cases.
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run() -> Result<(), AppError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { common } => {
            let cfg = common.resolve()?;
            let paths = cmd_simulate(&cfg)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Pca { common, files } => {
            let cfg = common.resolve()?;
            let paths = cmd_pca(&cfg, &files)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Eval {
            common,
            case,
            files,
        } => {
            let cfg = common.resolve()?;
            let out = cmd_eval(&cfg, case, &files)?;
            print!(
                "{}",
                cirsense_core::report::render_matrix(
                    &out.confusion,
                    cirsense_core::report::RenderFormat::AlignedTable
                )
            );
            println!("matrix: {}", out.matrix_csv.display());
            println!("model: {}", out.model.display());
            if let Some([csv, _]) = out.summary {
                println!("summary: {}", csv.display());
            }
        }
        Command::Pipeline { common } => {
            let cfg = common.resolve()?;
            let manifest = cmd_pipeline(&cfg)?;
            println!("{}", manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
