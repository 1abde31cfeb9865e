//! Command-line frontend: train broadcast-channel autoencoders, analyze
//! checkpoints, run power sweeps, and reproduce the reference experiments.
//!
//! Exit codes: 0 on success, 1 on runtime failures (training, I/O, corrupt
//! checkpoints), 2 on usage and configuration errors.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bcae::autoencoder::TrainConfig;
use bcae::error::{Error, Result};
use bcae::repro::Figure;

use commands::{ArchPreset, Experiment};
use settings::{default_out_dir, resolve, resolve_required, FileConfig};

#[derive(Parser)]
#[command(
    name = "bcae",
    about = "Two-user broadcast-channel autoencoder: training, analysis, sweeps, and reference reproductions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared across subcommands. Every value falls back to the optional
/// `--config` key=value file and then to the built-in defaults.
#[derive(Args, Debug, Default)]
struct CommonOpts {
    /// Bits for user 1 (default 1)
    #[arg(long)]
    k1: Option<u32>,
    /// Bits for user 2 (default 1)
    #[arg(long)]
    k2: Option<u32>,
    /// User-1 SNR in dB (required; must satisfy snr1 <= snr2)
    #[arg(long)]
    snr1_db: Option<f64>,
    /// User-2 SNR in dB (required)
    #[arg(long)]
    snr2_db: Option<f64>,
    /// Average transmit power budget (default 1)
    #[arg(long)]
    power: Option<f64>,
    /// Training steps (default 20000)
    #[arg(long)]
    steps: Option<usize>,
    /// Batch size (default 1000)
    #[arg(long)]
    batch: Option<usize>,
    /// Adam learning rate (default 0.001)
    #[arg(long)]
    lr: Option<f64>,
    /// Master seed; all randomness derives from it (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Architecture preset (default table1)
    #[arg(long, value_enum)]
    arch: Option<ArchPreset>,
    /// Steps between loss-history records (default 100)
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Output directory (default ./out)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps and Monte-Carlo chunks (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Optional key=value config file (flags take precedence)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write its checkpoint and loss history
    Train {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Analyze a checkpoint: constellation CSV, power split, labeling
    /// verdicts, Monte-Carlo SER, JSON report
    Analyze {
        #[command(flatten)]
        common: CommonOpts,
        /// Checkpoint to analyze
        #[arg(long)]
        model: PathBuf,
        /// Monte-Carlo trials for the SER estimate (default 100000)
        #[arg(long)]
        trials: Option<usize>,
        /// Also write plot-ready constellation data
        #[arg(long)]
        plot_data: bool,
    },
    /// Monte-Carlo symbol error rates for a checkpoint
    Ser {
        #[command(flatten)]
        common: CommonOpts,
        /// Checkpoint to evaluate
        #[arg(long)]
        model: PathBuf,
        /// Monte-Carlo trials (default 1000000)
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Sweep user-2 SNR and report the learned power split per point
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Sweep start (dB)
        #[arg(long)]
        snr2_from: f64,
        /// Sweep end, inclusive (dB)
        #[arg(long)]
        snr2_to: f64,
        /// Sweep step (dB, default 5)
        #[arg(long)]
        snr2_step: Option<f64>,
        /// Independently seeded trainings per point (default 3)
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Re-run a pinned reference experiment and check its claims
    Reproduce {
        /// One of fig3, fig4, fig5, fig6, fig7
        figure: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Resolves the experiment settings shared by train/sweep; `require_snr`
/// controls whether missing SNRs are an error.
fn resolve_experiment(common: &CommonOpts, file: &FileConfig) -> Result<Experiment> {
    let arch_file: Option<ArchPreset> = file
        .get::<String>("arch")?
        .map(|s| s.parse())
        .transpose()?;
    Ok(Experiment {
        k1: resolve(common.k1, file.get("k1")?, 1),
        k2: resolve(common.k2, file.get("k2")?, 1),
        snr1_db: resolve_required(common.snr1_db, file.get("snr1_db")?, "snr1_db")?,
        snr2_db: resolve_required(common.snr2_db, file.get("snr2_db")?, "snr2_db")?,
        power: resolve(common.power, file.get("power")?, 1.0),
        arch_preset: resolve(common.arch, arch_file, ArchPreset::Table1),
        train: TrainConfig {
            steps: resolve(common.steps, file.get("steps")?, 20_000),
            batch_size: resolve(common.batch, file.get("batch")?, 1000),
            learning_rate: resolve(common.lr, file.get("lr")?, 0.001),
            seed: resolve(common.seed, file.get("seed")?, 0),
            snapshot_every: resolve(common.snapshot_every, file.get("snapshot_every")?, 100),
        },
        out_dir: resolve(
            common.out_dir.clone(),
            file.get::<PathBuf>("out_dir")?,
            default_out_dir(),
        ),
    })
}

fn configure_jobs(common: &CommonOpts, file: &FileConfig) -> Result<()> {
    let jobs = common.jobs.or(file.get("jobs")?);
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure worker pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common } => {
            let file = FileConfig::load(common.config.as_deref())?;
            configure_jobs(&common, &file)?;
            let exp = resolve_experiment(&common, &file)?;
            commands::cmd_train(&exp)
        }
        Command::Analyze {
            common,
            model,
            trials,
            plot_data,
        } => {
            let file = FileConfig::load(common.config.as_deref())?;
            configure_jobs(&common, &file)?;
            let trials = resolve(trials, file.get("trials")?, 100_000);
            let ser_seed = resolve(common.seed, file.get("seed")?, 0);
            let out_dir = resolve(
                common.out_dir.clone(),
                file.get::<PathBuf>("out_dir")?,
                default_out_dir(),
            );
            commands::cmd_analyze(&model, &out_dir, trials, ser_seed, plot_data)
        }
        Command::Ser {
            common,
            model,
            trials,
        } => {
            let file = FileConfig::load(common.config.as_deref())?;
            configure_jobs(&common, &file)?;
            let trials = resolve(trials, file.get("trials")?, 1_000_000);
            let seed = resolve(common.seed, file.get("seed")?, 0);
            let snr_override = match (common.snr1_db, common.snr2_db) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => {
                    return Err(Error::Config(
                        "provide both --snr1-db and --snr2-db to override the channel".into(),
                    ))
                }
            };
            commands::cmd_ser(&model, snr_override, trials, seed)
        }
        Command::Sweep {
            common,
            snr2_from,
            snr2_to,
            snr2_step,
            repeats,
        } => {
            let file = FileConfig::load(common.config.as_deref())?;
            configure_jobs(&common, &file)?;
            let mut exp = resolve_experiment(&common, &file)?;
            // The sweep supplies snr2 itself; snr1 is the fixed axis.
            exp.snr2_db = snr2_to;
            let step = snr2_step.unwrap_or(5.0);
            let repeats = repeats.unwrap_or(3);
            commands::cmd_sweep(&exp, snr2_from, snr2_to, step, repeats)
        }
        Command::Reproduce { figure, common } => {
            let file = FileConfig::load(common.config.as_deref())?;
            configure_jobs(&common, &file)?;
            let figure: Figure = figure.parse()?;
            let out_dir = resolve(
                common.out_dir.clone(),
                file.get::<PathBuf>("out_dir")?,
                default_out_dir(),
            );
            commands::cmd_reproduce(figure, &out_dir, common.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
