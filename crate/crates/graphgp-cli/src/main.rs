//! Command-line runner: random walk kernels, GP learning-curve simulation
//! and the eigenvalue / belief-propagation predictions, driven by a JSON
//! experiment configuration.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Predictor};
use run::{RunContext, RunError};

#[derive(Parser)]
#[command(
    name = "graphgp",
    about = "GP regression with random walk kernels on random graphs: \
             simulation and learning-curve prediction",
    version
)]
struct Cli {
    /// Path to the JSON experiment configuration.
    #[arg(long, global = true, default_value = "experiment.json")]
    config: PathBuf,
    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: the config's `out`, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replicates and grid points (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generate one graph instance and write its edge list.
    GenGraph,
    /// Tree-kernel profile by distance for a list of walk lengths.
    TreeKernel,
    /// Prior-variance histogram and summary statistics of one kernel.
    KernelStats {
        /// Also write the dense kernel matrix as CSV (V <= 2000).
        #[arg(long)]
        dump_kernel: bool,
    },
    /// Monte-Carlo matched learning curve.
    Simulate,
    /// Eigenvalue learning-curve approximation (empirical and tree spectra).
    PredictEig,
    /// Belief-propagation / population-dynamics learning curve.
    PredictCavity {
        /// Also write the final population members' (0,0) entries.
        #[arg(long)]
        dump_population: bool,
    },
    /// Large-p master curve.
    MasterCurve,
    /// Mismatched student/teacher learning curve.
    Mismatch,
    /// Posterior-variance distributions (cavity and simulated).
    VarianceDist,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenGraph => "gen-graph",
            Command::TreeKernel => "tree-kernel",
            Command::KernelStats { .. } => "kernel-stats",
            Command::Simulate => "simulate",
            Command::PredictEig => "predict-eig",
            Command::PredictCavity { .. } => "predict-cavity",
            Command::MasterCurve => "master-curve",
            Command::Mismatch => "mismatch",
            Command::VarianceDist => "variance-dist",
        }
    }
}

fn execute(ctx: &mut RunContext, command: Command) -> Result<(), RunError> {
    match command {
        Command::GenGraph => run::run_gen_graph(ctx),
        Command::TreeKernel => run::run_tree_kernel(ctx),
        Command::KernelStats { dump_kernel } => {
            ctx.dump_kernel = dump_kernel;
            run::run_kernel_stats(ctx)
        }
        Command::Simulate => run::run_predictors(ctx, &[Predictor::Simulate]),
        Command::PredictEig => run::run_predictors(ctx, &[Predictor::Eig, Predictor::EigTree]),
        Command::PredictCavity { dump_population } => {
            ctx.dump_population = dump_population;
            run::run_predictors(ctx, &[Predictor::Cavity])
        }
        Command::MasterCurve => run::run_predictors(ctx, &[Predictor::Master]),
        Command::Mismatch => run::run_mismatch(ctx),
        Command::VarianceDist => run::run_variance_dist(ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("could not configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let config_bytes = match std::fs::read(&cli.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let out = cli
        .out
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let command = cli.command;
    let mut ctx = RunContext::new(cfg, &config_bytes, out, cli.seed, command.name());
    if let Err(e) = execute(&mut ctx, command) {
        eprintln!("{}: {e}", command.name());
        return ExitCode::from(1);
    }
    match ctx.finish() {
        Ok(manifest) => {
            println!(
                "{}: wrote {} file(s) in {} ms",
                manifest.command,
                manifest.files.len(),
                manifest.total_wall_ms
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("manifest: {e}");
            ExitCode::from(1)
        }
    }
}
