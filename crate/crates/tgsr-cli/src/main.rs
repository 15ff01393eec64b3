//! `tgsr` command-line tool.
//!
//! Subcommands cover the full workflow: `synth` emits a dataset, `solve`
//! trains a model, `predict` scores new samples, `evaluate` reports metrics,
//! `grid-search` sweeps hyper-parameters with resume support, and
//! `report-regions` maps the surviving groups back to frame rectangles.
//!
//! Exit codes: 0 success, 2 input/validation error, 3 solver
//! non-convergence (the model file is still written, flagged accordingly).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "tgsr", version, about = "Transfer group sparse regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SolverFlags {
    /// Salient group count (1..=K)
    #[arg(long)]
    pub kappa: Option<usize>,
    /// MMD weight (>= 0)
    #[arg(long)]
    pub xi: Option<f64>,
    /// Initial penalty weight
    #[arg(long)]
    pub mu0: Option<f64>,
    /// Penalty growth factor (> 1)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Penalty ceiling
    #[arg(long = "mu-max")]
    pub mu_max: Option<f64>,
    /// Convergence tolerance on max|C - D|
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iteration cap
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a dataset manifest
    Solve {
        /// Dataset manifest (JSON)
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Standardize features (fit on source, apply to both domains)
        #[arg(long)]
        standardize: bool,
        /// Write per-iteration history CSV here
        #[arg(long)]
        history: Option<PathBuf>,
        /// Output model file
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config file supplying defaults for the other flags
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Predict labels for a feature matrix with a trained model
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Feature CSV (K*d rows, one column per sample)
        #[arg(long)]
        features: PathBuf,
        /// Output predictions CSV
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score predictions against ground-truth labels
    Evaluate {
        /// Predictions CSV produced by `predict`
        #[arg(long)]
        predictions: PathBuf,
        /// Truth label CSV (one class index per row)
        #[arg(long)]
        truth: PathBuf,
        /// Optional JSON report output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep (kappa, xi) and keep the best-scoring point
    GridSearch {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Ground-truth labels for the target samples
        #[arg(long = "target-labels")]
        target_labels: Option<PathBuf>,
        /// Comma-separated kappa values (default: 1..=K)
        #[arg(long = "kappa-values")]
        kappa_values: Option<String>,
        /// Comma-separated xi values (default: the built-in six-range grid)
        #[arg(long = "xi-values")]
        xi_values: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        standardize: bool,
        /// Worker threads for grid points
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (ledger, grid CSV, summary, best model)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write regions.csv and mask.pgm for a trained model
    ReportRegions {
        #[arg(long)]
        model: PathBuf,
        /// Norm tolerance for counting a group as selected
        #[arg(long)]
        tol: Option<f64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic dataset with planted salient groups
    Synth {
        /// Group count K
        #[arg(long)]
        k: Option<usize>,
        /// Per-group dimension d
        #[arg(long)]
        d: Option<usize>,
        /// Category count C
        #[arg(long)]
        classes: Option<usize>,
        /// Source sample count
        #[arg(long)]
        ns: Option<usize>,
        /// Target sample count
        #[arg(long)]
        nt: Option<usize>,
        /// Comma-separated planted group indices
        #[arg(long)]
        planted: Option<String>,
        /// Mean offset on target nuisance groups
        #[arg(long)]
        shift: Option<f64>,
        /// Label-score noise level
        #[arg(long)]
        noise: Option<f64>,
        /// RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve {
            manifest,
            solver,
            standardize,
            history,
            out,
            config,
        } => commands::solve::run(manifest, solver, standardize, history, out, config),
        Command::Predict {
            model,
            features,
            out,
            config,
        } => commands::predict::run(model, features, out, config),
        Command::Evaluate {
            predictions,
            truth,
            out,
        } => commands::evaluate::run(predictions, truth, out),
        Command::GridSearch {
            manifest,
            target_labels,
            kappa_values,
            xi_values,
            solver,
            standardize,
            jobs,
            out,
            config,
        } => commands::grid_search::run(
            manifest,
            target_labels,
            kappa_values,
            xi_values,
            solver,
            standardize,
            jobs,
            out,
            config,
        ),
        Command::ReportRegions {
            model,
            tol,
            out,
            config,
        } => commands::report_regions::run(model, tol, out, config),
        Command::Synth {
            k,
            d,
            classes,
            ns,
            nt,
            planted,
            shift,
            noise,
            seed,
            out,
            config,
        } => commands::synth::run(
            k, d, classes, ns, nt, planted, shift, noise, seed, out, config,
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
