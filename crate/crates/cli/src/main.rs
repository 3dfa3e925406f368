use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use chunkqe::cost::CostParams;
use chunkqe::synthetic::SyntheticSpec;
use chunkqe_cli::commands::{self, Status, SweepParam};
use chunkqe_cli::config::{ExperimentArgs, ExperimentConfig};
use clap::{Parser, Subcommand};

/// Chunk-based pseudo-relevance-feedback re-ranking experiments
#[derive(Parser, Debug)]
#[command(name = "chunkqe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded synthetic collection (corpus, queries, qrels, folds)
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        docs: usize,
        #[arg(long, default_value_t = 10)]
        queries: usize,
    },
    /// Build and persist an inverted index
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// First-stage retrieval: dph, bm25, ql, dph+kl, bm25+rm3, ql+rm3
    Rank {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value = "dph+kl")]
        model: String,
        #[arg(long, default_value_t = 1000)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Three-phase re-ranking; writes run.txt and trace.jsonl
    Qe {
        #[command(flatten)]
        args: ExperimentArgs,
    },
    /// Evaluate a TREC run against qrels
    Eval {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, default_value = "P@20,NDCG@20,MAP@100,MAP@1000")]
        metrics: String,
        #[arg(long)]
        per_query: bool,
        #[arg(long)]
        json: bool,
    },
    /// Paired two-tailed t-test between two runs (b minus a)
    Sigtest {
        #[arg(long)]
        run_a: PathBuf,
        #[arg(long)]
        run_b: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, default_value = "NDCG@20")]
        metric: String,
    },
    /// Five-fold cross-validation of alpha and beta
    Cv {
        #[command(flatten)]
        args: ExperimentArgs,
    },
    /// Pipeline runs over several values of k_c or m
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<i64>,
        #[command(flatten)]
        args: ExperimentArgs,
    },
    /// FLOPs of three-letter model configurations relative to a Large re-ranker
    Cost {
        /// e.g. LLS; all standard configurations when absent
        config: Option<String>,
        #[arg(long, default_value_t = 10)]
        kd: usize,
        #[arg(long, default_value_t = 10)]
        kc: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<Status> {
    let (text, status) = match cli.command {
        Command::Synth { out, seed, docs, queries } => {
            let spec = SyntheticSpec {
                seed,
                num_docs: docs,
                num_queries: queries,
                ..SyntheticSpec::default()
            };
            (commands::synth(&out, &spec)?, Status::Complete)
        }
        Command::Index { corpus, out } => (commands::build_index(&corpus, &out)?, Status::Complete),
        Command::Rank { corpus, index, queries, model, k, out } => (
            commands::rank(corpus.as_deref(), index.as_deref(), &queries, &model, k, &out)?,
            Status::Complete,
        ),
        Command::Qe { args } => commands::qe(ExperimentConfig::resolve(&args)?)?,
        Command::Eval { run, qrels, metrics, per_query, json } => (
            commands::eval(&run, &qrels, &commands::parse_metrics(&metrics)?, per_query, json)?,
            Status::Complete,
        ),
        Command::Sigtest { run_a, run_b, qrels, metric } => (
            commands::sigtest(&run_a, &run_b, &qrels, metric.parse()?)?,
            Status::Complete,
        ),
        Command::Cv { args } => commands::cv(ExperimentConfig::resolve(&args)?)?,
        Command::Sweep { param, values, args } => {
            commands::sweep(ExperimentConfig::resolve(&args)?, param, &values)?
        }
        Command::Cost { config, kd, kc, m, json } => (
            commands::cost(config.as_deref(), CostParams { k_d: kd, k_c: kc, m }, json)?,
            Status::Complete,
        ),
    };
    print!("{text}");
    Ok(status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Partial(failed)) => {
            eprintln!("error: {} queries failed: {}", failed.len(), failed.join(" "));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
