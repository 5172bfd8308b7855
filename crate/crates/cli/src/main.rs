//! `fedids` — synthetic traffic generation, flow featurization, federated
//! autoencoder training, threshold calibration, detection, and evaluation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fedids_cli::commands::{self, EvalCompareArgs, EvalSweepArgs, GenArgs, TrainFedArgs, TrainLocalArgs};
use fedids_cli::error::CliError;

#[derive(Parser)]
#[command(name = "fedids", version, about = "Unsupervised federated intrusion detection toolkit")]
struct Cli {
    /// Override the run seed from config files and defaults.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate labeled synthetic traffic (single profile or reference mix).
    Gen {
        /// benign | synflood | udpflood | reference
        #[arg(long)]
        profile: String,
        /// Flow count (required for single profiles; rescales the reference mix).
        #[arg(long)]
        n: Option<usize>,
        /// Time window length in seconds.
        #[arg(long, default_value_t = 1.0)]
        tw: f64,
        /// Manifest file with per-environment class counts (reference only).
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a packet-record CSV into per-flow feature rows.
    Featurize {
        #[arg(long)]
        packets: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        tw: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the autoencoder with federated averaging and calibrate alpha.
    TrainFed {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        threshold_out: PathBuf,
        /// Per-round loss/time CSV.
        #[arg(long)]
        telemetry: PathBuf,
    },
    /// Train one local autoencoder on the benign rows of a dataset.
    TrainLocal {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Calibrate the detection threshold from benign validation rows.
    Calibrate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// MAD multiplier in alpha = median + multiplier · MAD.
        #[arg(long, default_value_t = 5.0)]
        multiplier: f64,
    },
    /// Score flows against a model and threshold, writing verdicts.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        threshold: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate detection metrics (plain, or one of the experiment shapes).
    Eval(EvalTop),
}

#[derive(Args)]
struct EvalTop {
    #[command(subcommand)]
    mode: Option<EvalMode>,

    /// Model file (plain evaluation).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Threshold file (plain evaluation).
    #[arg(long)]
    threshold: Option<PathBuf>,
    /// Labeled test CSV (plain evaluation).
    #[arg(long)]
    test: Option<PathBuf>,
    /// Report CSV output (plain evaluation).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvalMode {
    /// Re-run the federation per client count; emit a table of metrics.
    SweepClients {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated client counts, e.g. 3,6,8,10.
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 6, 8, 10])]
        k: Vec<usize>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Evaluate each attack class separately against shared benign rows.
    PerAttack {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        threshold: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Train pooled-centralized and federated models; compare on one test set.
    CentralVsFed {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen {
            profile,
            n,
            tw,
            manifest,
            out,
        } => commands::gen(&GenArgs {
            profile,
            n,
            seed: cli.seed.unwrap_or(42),
            tw,
            manifest,
            out,
        }),
        Command::Featurize { packets, tw, out } => commands::featurize(&packets, tw, &out),
        Command::TrainFed {
            data,
            config,
            model_out,
            threshold_out,
            telemetry,
        } => commands::train_fed(&TrainFedArgs {
            data,
            config,
            model_out,
            threshold_out,
            telemetry,
            seed: cli.seed,
        }),
        Command::TrainLocal {
            data,
            config,
            model_out,
        } => commands::train_local(&TrainLocalArgs {
            data,
            config,
            model_out,
            seed: cli.seed,
        }),
        Command::Calibrate {
            model,
            val,
            out,
            multiplier,
        } => commands::calibrate(&model, &val, &out, multiplier),
        Command::Detect {
            model,
            threshold,
            data,
            out,
        } => commands::detect(&model, &threshold, &data, &out),
        Command::Eval(eval) => match eval.mode {
            Some(EvalMode::SweepClients {
                data,
                config,
                k,
                report,
            }) => commands::eval_sweep_clients(&EvalSweepArgs {
                data,
                config,
                k_values: k,
                report,
                seed: cli.seed,
            }),
            Some(EvalMode::PerAttack {
                model,
                threshold,
                test,
                report,
            }) => commands::eval_per_attack(&model, &threshold, &test, &report),
            Some(EvalMode::CentralVsFed {
                data,
                config,
                report,
            }) => commands::eval_central_vs_fed(&EvalCompareArgs {
                data,
                config,
                report,
                seed: cli.seed,
            }),
            None => {
                let (model, threshold, test, report) =
                    match (eval.model, eval.threshold, eval.test, eval.report) {
                        (Some(m), Some(t), Some(d), Some(r)) => (m, t, d, r),
                        _ => {
                            return Err(CliError::validation(
                                "eval requires --model, --threshold, --test, and --report \
                                 (or a subcommand: sweep-clients, per-attack, central-vs-fed)",
                            ))
                        }
                    };
                commands::eval_single(&model, &threshold, &test, &report)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            let mut source = std::error::Error::source(&error);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
