//! `mgcmn`: motif statistics, training, protocol runs, grid search and the
//! two verification harnesses (gradient check, motif oracle check).
//!
//! Exit codes: 0 success, 1 computational failure (including a failed
//! check), 2 configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use mgcmn::motif::MotifSemantics;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration: exit code 2.
    Config(String),
    /// Anything that went wrong while computing: exit code 1.
    Failed(String),
}

impl From<mgcmn::Error> for CliError {
    fn from(e: mgcmn::Error) -> Self {
        match e {
            mgcmn::Error::Config(m) => CliError::Config(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "mgcmn", version, about = "Motif-weighted graph convolution for node classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration; flags below override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Named dataset: cora, citeseer, pubmed, 107, 414, 1684, 1912.
    #[arg(long)]
    dataset: Option<String>,
    /// Mixed-matrix recipe, e.g. `edge:8,triangle:1,wedge:3`.
    #[arg(long)]
    recipe: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel runs and sparse products.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Generic-format edge list (with --features and --labels).
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut rc = match &self.config {
            Some(path) => {
                let mut rc = RunConfig::from_file(path)?;
                rc.resolve_paths(path.parent().unwrap_or_else(|| std::path::Path::new(".")));
                rc
            }
            None => RunConfig::default(),
        };
        rc.apply(Overrides {
            dataset: self.dataset.clone(),
            recipe: self.recipe.clone(),
            runs: self.runs,
            seed: self.seed,
            threads: self.threads,
            out: self.out.clone(),
            edge_file: self.edges.clone(),
            feature_file: self.features.clone(),
            label_file: self.labels.clone(),
        });
        if let Some(n) = rc.threads {
            if n == 0 {
                return Err(CliError::Config("threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Failed(format!("cannot start thread pool: {e}")))?;
        }
        Ok(rc)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Triangle/wedge counts, clustering coefficient and sparsity bounds.
    MotifStats(Common),
    /// Train one model; prints the report and saves the weights.
    Train {
        #[command(flatten)]
        common: Common,
        /// Where to save the trained model (default: next to --out).
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Score a saved model on the dataset's splits.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Train `runs` models with consecutive seeds and summarize.
    Protocol(Common),
    /// Compare analytic and finite-difference gradients on the bundled graph.
    Gradcheck {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Must stay 0; anything else is refused.
        #[arg(long, default_value_t = 0.0)]
        dropout: f64,
        /// Corrupt the analytic gradient (negative control).
        #[arg(long, hide = true)]
        inject_error: bool,
    },
    /// Compare the motif kernels with brute-force enumeration on random graphs.
    OracleCheck {
        #[arg(long, default_value_t = 50)]
        n_graphs: usize,
        #[arg(long, default_value_t = 5)]
        min_n: usize,
        #[arg(long, default_value_t = 25)]
        max_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// co_occurrence or edge_in_instance.
        #[arg(long, default_value = "co_occurrence")]
        semantics: MotifSemantics,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score candidate recipes by mean validation accuracy.
    GridSearch {
        #[command(flatten)]
        common: Common,
        /// One recipe per line; `#` starts a comment.
        #[arg(long)]
        grid: PathBuf,
        /// Seeds averaged per recipe.
        #[arg(long)]
        grid_seeds: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::MotifStats(c) => commands::motif_stats(&c.resolve()?),
        Command::Train { common, model_out } => {
            let mut rc = common.resolve()?;
            if model_out.is_some() {
                rc.model_out = model_out;
            }
            commands::train(&rc)
        }
        Command::Evaluate { common, model } => commands::evaluate(&common.resolve()?, &model),
        Command::Protocol(c) => commands::protocol(&c.resolve()?),
        Command::Gradcheck {
            seed,
            out,
            dropout,
            inject_error,
        } => commands::gradcheck(seed, dropout, inject_error, out.as_deref()),
        Command::OracleCheck {
            n_graphs,
            min_n,
            max_n,
            seed,
            semantics,
            out,
        } => commands::oracle_check(n_graphs, min_n, max_n, seed, semantics, out.as_deref()),
        Command::GridSearch {
            common,
            grid,
            grid_seeds,
        } => {
            let mut rc = common.resolve()?;
            if grid_seeds.is_some() {
                rc.grid_seeds = grid_seeds;
            }
            commands::grid_search(&rc, &grid)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
