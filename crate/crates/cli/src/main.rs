//! Command-line entry: argument parsing, exit-code mapping, and dispatch to
//! the subcommands or the interactive session.

mod commands;
mod session;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "crucible",
    about = "Leakage-safe machine-learning experimentation",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a dataset: feature statistics, class balance, optional plots
    Analyze {
        dataset: PathBuf,
        manifest: PathBuf,
        /// Directory for plot artifacts (boxplot of all features, scatter of the first two)
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Execute one experiment config and append its records to the store
    Run {
        config: PathBuf,
        /// Output directory holding the results store
        #[arg(long)]
        out: PathBuf,
    },
    /// Expand a batch document into a config grid and execute it
    Batch {
        batch: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Statistically compare models on one metric
    Compare {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        metric: String,
        /// Config hashes of the models to compare
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Rank models under a weighted application scenario
    Rank {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Generate report artifacts from the results store
    Report {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Config hashes to report on (default: every config in the store)
        #[arg(long, num_args = 1..)]
        configs: Vec<String>,
    },
}

fn main() {
    // Rust ignores SIGPIPE by default, turning a closed downstream pipe
    // into a print panic; restore the usual silent filter death instead
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{}", e);
            return 0;
        }
        Err(e) => {
            eprint!("{}", e);
            return commands::EXIT_USAGE;
        }
    };
    let result = match cli.command {
        None => return session::interactive(),
        Some(Command::Analyze {
            dataset,
            manifest,
            plots,
        }) => commands::analyze(&dataset, &manifest, plots.as_deref()),
        Some(Command::Run { config, out }) => commands::run(&config, &out),
        Some(Command::Batch { batch, out }) => commands::batch(&batch, &out),
        Some(Command::Compare {
            store,
            metric,
            models,
            alpha,
        }) => commands::compare_cmd(&store, &metric, &models, alpha),
        Some(Command::Rank { store, scenario }) => commands::rank_cmd(&store, &scenario),
        Some(Command::Report {
            store,
            out,
            configs,
        }) => commands::report_cmd(&store, &out, &configs),
    };
    match result {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}
