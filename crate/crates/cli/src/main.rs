//! `battlesim` command-line harness.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "battlesim", version, about = "Deterministic 2D multi-agent battle simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes with scripted controllers and report summary metrics.
    Run {
        /// Scenario file or catalog name.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1)]
        episodes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// random | heuristic:<tier> | replay:<trace>
        #[arg(long, default_value = "heuristic:medium")]
        ally: String,
        #[arg(long, default_value = "heuristic:medium")]
        enemy: String,
        /// Write one JSON line per executed step.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write SVG frames per episode into this directory.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Steps between SVG frames.
        #[arg(long, default_value_t = 10)]
        svg_every: u32,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Measure steps per second for several batch sizes.
    Bench {
        #[arg(long)]
        scenario: String,
        /// Comma-separated environment counts.
        #[arg(long, value_delimiter = ',', default_value = "1,64,1024")]
        envs: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        threads: Option<usize>,
        /// Also time this many resets of distinct sampled scenarios.
        #[arg(long, default_value_t = 0)]
        reconfig: usize,
    },
    /// Check a scenario file and print every problem found.
    Validate { file: String },
    /// Sample levels from a generator spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply one mutation operator to a scenario.
    Mutate {
        #[arg(long)]
        scenario: String,
        /// perturb | perturb:<delta> | swap-axes | retype
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List or export the predefined scenarios.
    Catalog {
        #[arg(long, conflicts_with = "export")]
        list: bool,
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, episodes, seed, ally, enemy, trace, svg, svg_every, threads } => {
            commands::run(&commands::RunArgs {
                scenario,
                episodes,
                seed,
                ally,
                enemy,
                trace,
                svg,
                svg_every,
                threads,
            })
        }
        Command::Bench { scenario, envs, steps, threads, reconfig } => {
            commands::bench(&scenario, &envs, steps, threads, reconfig)
        }
        Command::Validate { file } => commands::validate(&file),
        Command::Gen { spec, count, seed, out } => commands::gen(&spec, count, seed, &out),
        Command::Mutate { scenario, op, seed, out } => commands::mutate(&scenario, &op, seed, &out),
        Command::Catalog { list, export } => commands::catalog(list, export.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::ValidationFailed>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
