//! `fimctx`: context collection and offline evaluation for repository-level
//! fill-in-the-middle code completion.

use clap::{Parser, Subcommand};
use fimctx::cli::{
    cmd_collect, cmd_convert, cmd_evaluate, cmd_leaderboard, cmd_validate, FileConfig, MockSpec,
    RunConfig, EXIT_USAGE,
};
use fimctx::collect::Strategy;
use fimctx::harness::LeaderboardFormat;
use fimctx::Language;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fimctx", version, about = "Context collection pipeline for FIM code completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check dataset integrity and print diagnostics.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        language: Language,
    },
    /// Run a context-collection strategy over every completion point.
    Collect {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        language: Language,
        /// empty | random | recent | bm25_file | hybrid | symbol_defs | block_bm25 | trigram
        #[arg(long)]
        strategy: Option<Strategy>,
        /// TOML config overriding strategy constants.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output contexts file (JSON lines: {"id", "context"}).
        #[arg(long, default_value = "contexts.jsonl")]
        out: PathBuf,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score a contexts file against model backends and write a run report.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        language: Language,
        /// Contexts file produced by `collect`.
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Offline completions file (JSON lines: {"id", "model", "completion"}).
        #[arg(long, conflicts_with = "mock")]
        completions: Option<PathBuf>,
        /// Deterministic mock backend: echo | empty | constant:<text>
        #[arg(long)]
        mock: Option<MockSpec>,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        #[arg(long)]
        parallelism: Option<usize>,
        /// Run name shown on leaderboards.
        #[arg(long)]
        run_id: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rank run reports into a leaderboard table.
    Leaderboard {
        /// Report JSON files written by `evaluate`.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// markdown | csv | json
        #[arg(long, default_value = "markdown")]
        format: LeaderboardFormat,
    },
    /// Convert a published archive layout into a loadable dataset root.
    Convert {
        /// Directory with points.jsonl and snapshots/<repo>/<revision>
        /// trees or <revision>.tar.gz archives.
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        dest: PathBuf,
        #[arg(long)]
        language: Language,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { dataset, language } => cmd_validate(&dataset, language),
        Command::Collect { dataset, language, strategy, config, out, parallelism, seed } => {
            match FileConfig::load(config.as_deref()) {
                Ok(file) => {
                    let mut run = RunConfig::from_file_config(dataset, language, &file);
                    if let Some(strategy) = strategy {
                        run.collector.strategy = strategy;
                    }
                    if let Some(seed) = seed {
                        run.collector.rng_seed = seed;
                    }
                    if let Some(parallelism) = parallelism {
                        run.parallelism = parallelism.max(1);
                    }
                    cmd_collect(&run, &out)
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    EXIT_USAGE
                }
            }
        }
        Command::Evaluate {
            dataset,
            language,
            contexts,
            config,
            completions,
            mock,
            out,
            parallelism,
            run_id,
            seed,
        } => match FileConfig::load(config.as_deref()) {
            Ok(file) => {
                let mut run = RunConfig::from_file_config(dataset, language, &file);
                if let Some(parallelism) = parallelism {
                    run.parallelism = parallelism.max(1);
                }
                if let Some(run_id) = run_id {
                    run.run_id = run_id;
                }
                if let Some(seed) = seed {
                    run.collector.rng_seed = seed;
                }
                cmd_evaluate(&run, &contexts, completions.as_deref(), mock.as_ref(), &out)
            }
            Err(err) => {
                eprintln!("error: {err}");
                EXIT_USAGE
            }
        },
        Command::Leaderboard { reports, format } => cmd_leaderboard(&reports, format),
        Command::Convert { source, dest, language } => cmd_convert(&source, &dest, language),
    };
    std::process::exit(code);
}
