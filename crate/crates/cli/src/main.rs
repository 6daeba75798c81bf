//! Command-line front end for the reduced-order modeling pipeline.
//!
//! Exit codes: 0 on success, 2 for usage or input validation failures,
//! 3 for numerical failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{AsArgs, CvArgs, GenArgs, InputArgs, PodArgs, PredictArgs, SummaryArgs, SweepArgs, TrainArgs};
use config::ConfigFile;
use romas::error::Error;

#[derive(Parser)]
#[command(
    name = "romas",
    version,
    about = "Non-intrusive reduced-order modeling: POD with interpolation, \
             with modal coefficients regressed over the full parameter space \
             (RBF) or a one-dimensional active subspace (GPR)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonInput {
    /// Synthetic problem preset (beam-proxy or pressure-proxy)
    #[arg(long)]
    preset: Option<String>,
    /// Sample count when using a preset
    #[arg(long)]
    samples: Option<usize>,
    /// Snapshot matrix file (CSV or RSNP1)
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Parameter sample CSV
    #[arg(long)]
    params: Option<PathBuf>,
    /// Comma-separated per-axis lower bounds (file input)
    #[arg(long)]
    lower: Option<String>,
    /// Comma-separated per-axis upper bounds (file input)
    #[arg(long)]
    upper: Option<String>,
}

impl CommonInput {
    fn into_input(self, seed: u64) -> InputArgs {
        InputArgs {
            preset: self.preset,
            samples: self.samples,
            snapshots: self.snapshots,
            params: self.params,
            lower: self.lower,
            upper: self.upper,
            seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate snapshot and parameter files from a synthetic preset
    Gen {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write snapshots in the RSNP1 binary format instead of CSV
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the POD basis, singular values, and decay table
    Pod {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a ROM from snapshot and parameter files
    Train {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        lower: Option<String>,
        #[arg(long)]
        upper: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        energy: Option<f64>,
        /// Coefficient regressor: full-rbf or as-gpr
        #[arg(long)]
        method: Option<String>,
        /// Gradient strategy for as-gpr: local-linear or global-linear
        #[arg(long)]
        gradients: Option<String>,
        /// Subtract the snapshot mean before the SVD
        #[arg(long)]
        centering: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict the full field at a parameter point from a trained model
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated physical parameter values
        #[arg(long)]
        mu: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-mode active-subspace spectra and dimension diagnostics
    As {
        #[command(flatten)]
        input: CommonInput,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        energy: Option<f64>,
        /// Gradient strategy: analytic, local-linear, or global-linear
        #[arg(long)]
        gradients: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sufficient-summary tables per modal coefficient
    Summary {
        #[command(flatten)]
        input: CommonInput,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        gradients: Option<String>,
        /// 1-based mode index; all retained modes when omitted
        #[arg(long)]
        mode: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-fold cross-validation error of one method
    Cv {
        #[command(flatten)]
        input: CommonInput,
        /// Coefficient regressor: full-rbf or as-gpr
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        gradients: Option<String>,
        /// Fold count
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error-versus-sample-count sweep across methods
    Sweep {
        #[command(flatten)]
        input: CommonInput,
        /// Sample counts: comma list (20,40) or range (20:200:20)
        #[arg(long)]
        sizes: Option<String>,
        /// Comma-separated methods (default full-rbf,as-gpr)
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        gradients: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io { .. } => 2,
        Error::IllConditioned { .. }
        | Error::NoActiveSubspace(_)
        | Error::Numerical(_)
        | Error::Undefined(_) => 3,
        Error::Mode { source, .. } | Error::Fold { source, .. } => exit_code_for(source),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen {
            preset,
            samples,
            seed,
            binary,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_gen(
                GenArgs {
                    preset,
                    samples,
                    seed,
                    binary,
                    out,
                },
                &cfg,
            )
        }
        Command::Pod {
            snapshots,
            rank,
            energy,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_pod(
                PodArgs {
                    snapshots,
                    rank,
                    energy,
                    out,
                },
                &cfg,
            )
        }
        Command::Train {
            snapshots,
            params,
            lower,
            upper,
            rank,
            energy,
            method,
            gradients,
            centering,
            seed,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_train(
                TrainArgs {
                    snapshots,
                    params,
                    lower,
                    upper,
                    rank,
                    energy,
                    method,
                    gradients,
                    centering,
                    seed,
                    out,
                },
                &cfg,
            )
        }
        Command::Predict {
            model,
            mu,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_predict(PredictArgs { model, mu, out }, &cfg)
        }
        Command::As {
            input,
            rank,
            energy,
            gradients,
            seed,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_as(
                AsArgs {
                    input: input.into_input(seed),
                    rank,
                    energy,
                    gradients,
                    out,
                },
                &cfg,
            )
        }
        Command::Summary {
            input,
            rank,
            energy,
            gradients,
            mode,
            seed,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_summary(
                SummaryArgs {
                    input: input.into_input(seed),
                    rank,
                    energy,
                    gradients,
                    mode,
                    out,
                },
                &cfg,
            )
        }
        Command::Cv {
            input,
            method,
            rank,
            energy,
            gradients,
            k,
            seed,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_cv(
                CvArgs {
                    input: input.into_input(seed),
                    method,
                    rank,
                    energy,
                    gradients,
                    k,
                    out,
                },
                &cfg,
            )
        }
        Command::Sweep {
            input,
            sizes,
            methods,
            rank,
            energy,
            gradients,
            k,
            seed,
            config,
            out,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            commands::cmd_sweep(
                SweepArgs {
                    input: input.into_input(seed),
                    sizes,
                    methods,
                    rank,
                    energy,
                    gradients,
                    k,
                    out,
                },
                &cfg,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
