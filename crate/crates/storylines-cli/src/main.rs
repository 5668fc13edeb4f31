//! Command-line front end: ingestion → clustering → storyline tree →
//! re-ordering → discovery → rendering, as separate subcommands sharing one
//! configuration model.
//!
//! Exit codes: 0 on success, 2 on command-line usage errors, 3 on data or
//! I/O errors, 4 when an internal invariant breaks (a bug, not bad input).
//! Errors print as a single `storylines: error: …` line on stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "storylines",
    version,
    about = "Streamline scenario ensembles into tree-defined storylines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Scenario CSV: header row, one column per output of interest
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Uncertain-input CSV aligned row for row with the scenario CSV
    #[arg(long, value_name = "PATH")]
    theta: Option<PathBuf>,
    /// Column metadata JSON: units, kinds, categorical flags
    #[arg(long = "meta", value_name = "PATH")]
    metadata: Option<PathBuf>,
    /// Output directory for artifacts (created if missing)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// JSON run config; command-line flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for every random choice in the run
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct LockArgs {
    /// Range ratio above which an output counts as open
    #[arg(long = "lock-partial")]
    lock_partial: Option<f64>,
    /// Range ratio at or below which an output counts as locked
    #[arg(long = "lock-locked")]
    lock_locked: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the outputs, fit a storyline tree, re-order, render figures
    Pipeline {
        #[command(flatten)]
        io: IoArgs,
        /// Number of storylines (clusters)
        #[arg(long)]
        k: Option<usize>,
        /// k-Means restarts per k
        #[arg(long)]
        restarts: Option<usize>,
        /// Leaf budget for the tree (default: k)
        #[arg(long = "max-leaves")]
        max_leaves: Option<usize>,
        #[command(flatten)]
        locks: LockArgs,
    },
    /// Trace total intra-cluster distance over a range of k
    Elbow {
        #[command(flatten)]
        io: IoArgs,
        /// Smallest k to try
        #[arg(long = "k-min")]
        k_min: Option<usize>,
        /// Largest k to try
        #[arg(long = "k-max")]
        k_max: Option<usize>,
        /// k-Means restarts per k
        #[arg(long)]
        restarts: Option<usize>,
        #[command(flatten)]
        locks: LockArgs,
    },
    /// Tabulate distances and tree diagnostics to guide the choice of k
    Advise {
        #[command(flatten)]
        io: IoArgs,
        /// Smallest k to try
        #[arg(long = "k-min")]
        k_min: Option<usize>,
        /// Largest k to try
        #[arg(long = "k-max")]
        k_max: Option<usize>,
        /// k-Means restarts per k
        #[arg(long)]
        restarts: Option<usize>,
        #[command(flatten)]
        locks: LockArgs,
    },
    /// Explain storyline membership from the uncertain inputs
    Discover {
        #[command(flatten)]
        io: IoArgs,
        /// Number of storylines (clusters)
        #[arg(long)]
        k: Option<usize>,
        /// k-Means restarts
        #[arg(long)]
        restarts: Option<usize>,
        /// Cross-validation folds
        #[arg(long)]
        folds: Option<usize>,
        /// Smallest leaf budget in the sweep
        #[arg(long = "budget-min")]
        budget_min: Option<usize>,
        /// Largest leaf budget in the sweep
        #[arg(long = "budget-max")]
        budget_max: Option<usize>,
        /// Coverage margin within which a simpler tree is preferred
        #[arg(long = "select-margin")]
        select_margin: Option<f64>,
        #[command(flatten)]
        locks: LockArgs,
    },
    /// Rank outcome columns by range and apply a screening rule
    Screen {
        #[command(flatten)]
        io: IoArgs,
        /// Screening rule: threshold=<value> or top=<count>
        #[arg(long)]
        rule: Option<String>,
    },
    /// Generate a synthetic blob benchmark with label-driving inputs
    Synth {
        #[command(flatten)]
        io: IoArgs,
        /// Cluster (blob) count
        #[arg(long)]
        blobs: Option<usize>,
        /// Scenario count
        #[arg(long)]
        n: Option<usize>,
        /// Outputs of interest
        #[arg(long)]
        m: Option<usize>,
        /// Uncertain inputs
        #[arg(long)]
        p: Option<usize>,
        /// Probability a label flips to a different cluster
        #[arg(long)]
        noise: Option<f64>,
        /// Blob center spacing in standard deviations
        #[arg(long)]
        separation: Option<f64>,
        /// The two label-driving input columns, e.g. 2,7
        #[arg(long, value_delimiter = ',')]
        drivers: Option<Vec<usize>>,
    },
}

impl Command {
    fn io(&self) -> &IoArgs {
        match self {
            Command::Pipeline { io, .. }
            | Command::Elbow { io, .. }
            | Command::Advise { io, .. }
            | Command::Discover { io, .. }
            | Command::Screen { io, .. }
            | Command::Synth { io, .. } => io,
        }
    }

    /// The flags of this invocation as a configuration overlay.
    fn overlay(&self) -> RunConfig {
        let io = self.io();
        let mut cfg = RunConfig {
            input: io.input.clone(),
            theta: io.theta.clone(),
            metadata: io.metadata.clone(),
            out: io.out.clone(),
            seed: io.seed,
            jobs: io.jobs,
            ..RunConfig::default()
        };
        match self {
            Command::Pipeline {
                k,
                restarts,
                max_leaves,
                locks,
                ..
            } => {
                cfg.k = *k;
                cfg.restarts = *restarts;
                cfg.max_leaves = *max_leaves;
                cfg.lock_partial = locks.lock_partial;
                cfg.lock_locked = locks.lock_locked;
            }
            Command::Elbow {
                k_min,
                k_max,
                restarts,
                locks,
                ..
            }
            | Command::Advise {
                k_min,
                k_max,
                restarts,
                locks,
                ..
            } => {
                cfg.k_min = *k_min;
                cfg.k_max = *k_max;
                cfg.restarts = *restarts;
                cfg.lock_partial = locks.lock_partial;
                cfg.lock_locked = locks.lock_locked;
            }
            Command::Discover {
                k,
                restarts,
                folds,
                budget_min,
                budget_max,
                select_margin,
                locks,
                ..
            } => {
                cfg.k = *k;
                cfg.restarts = *restarts;
                cfg.folds = *folds;
                cfg.budget_min = *budget_min;
                cfg.budget_max = *budget_max;
                cfg.select_margin = *select_margin;
                cfg.lock_partial = locks.lock_partial;
                cfg.lock_locked = locks.lock_locked;
            }
            Command::Screen { rule, .. } => {
                cfg.rule = rule.clone();
            }
            Command::Synth {
                blobs,
                n,
                m,
                p,
                noise,
                separation,
                drivers,
                ..
            } => {
                cfg.blobs = *blobs;
                cfg.n = *n;
                cfg.m = *m;
                cfg.p = *p;
                cfg.noise = *noise;
                cfg.separation = *separation;
                cfg.drivers = drivers.clone();
            }
        }
        cfg
    }
}

fn run(command: &Command) -> anyhow::Result<()> {
    let file_config = match &command.io().config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = file_config.overridden_by(command.overlay());
    match command {
        Command::Pipeline { .. } => commands::pipeline(&cfg),
        Command::Elbow { .. } => commands::elbow(&cfg),
        Command::Advise { .. } => commands::advise(&cfg),
        Command::Discover { .. } => commands::discover(&cfg),
        Command::Screen { .. } => commands::screen(&cfg),
        Command::Synth { .. } => commands::synth(&cfg),
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<storylines::Error>() {
        Some(e) if e.is_internal() => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = format!("{err:#}").replace('\n', "; ");
            eprintln!("storylines: error: {message}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
