//! `docsim` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "docsim",
    version,
    about = "Document similarity with TF-IDF, word and document embeddings, and TF-IDF re-ranked by word vectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write a synthetic tagged corpus.
    Generate,
    /// Filter the corpus by length and sample evaluation datasets.
    Sample,
    /// Build the vocabulary and train embeddings on one dataset.
    Train,
    /// Rank every document of one dataset with each method.
    Rank,
    /// Score the rankings of one dataset against tag-based ground truth.
    Evaluate,
    /// Run every method on every dataset and write a combined report.
    Benchmark,
}

/// Every flag overrides the config key of the same name.
#[derive(Args)]
struct Flags {
    /// Config file of `key = value` lines, or `default` for built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Single-threaded training; repeated runs give identical output.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Method to run: tfidf, avgwv, d2v or tfw2v. Repeatable.
    #[arg(long, global = true, value_name = "NAME")]
    method: Vec<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    min_weight: Option<f64>,
    #[arg(long, global = true)]
    max_term: Option<usize>,
    /// Evaluation cut-off. Repeatable.
    #[arg(long, global = true, value_name = "N")]
    top_n: Vec<usize>,
    /// Output directory.
    #[arg(long = "out", global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    corpus: Option<PathBuf>,
    /// 1-based dataset number for train, rank and evaluate.
    #[arg(long, global = true)]
    dataset: Option<usize>,
    #[arg(long, global = true, value_name = "PATH")]
    stopwords: Option<PathBuf>,
}

impl Flags {
    fn into_config(self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut overrides: Vec<(&str, String)> = Vec::new();
        let mut push = |key, value: Option<String>| {
            if let Some(v) = value {
                overrides.push((key, v));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push("workers", self.workers.map(|v| v.to_string()));
        push("deterministic", self.deterministic.then(|| "true".into()));
        push("methods", (!self.method.is_empty()).then(|| self.method.join(",")));
        push("alpha", self.alpha.map(|v| v.to_string()));
        push("min_weight", self.min_weight.map(|v| v.to_string()));
        push("max_term", self.max_term.map(|v| v.to_string()));
        push(
            "top_n",
            (!self.top_n.is_empty()).then(|| self.top_n.iter().map(usize::to_string).collect::<Vec<_>>().join(",")),
        );
        push("output_dir", self.output_dir.map(|p| p.display().to_string()));
        push("corpus", self.corpus.map(|p| p.display().to_string()));
        push("dataset", self.dataset.map(|v| v.to_string()));
        push("stopwords", self.stopwords.map(|p| p.display().to_string()));
        for (key, value) in overrides {
            cfg.set(key, &value)?;
        }
        cfg.validate()?;
        cfg.resolve();
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match cli.flags.into_config() {
        Ok(cfg) => cfg,
        Err(e) => return Failure::Config(e).report(),
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global() {
        eprintln!("warning: could not size the thread pool: {e}");
    }
    let result = match cli.command {
        Command::Generate => commands::generate(&cfg),
        Command::Sample => commands::sample(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Rank => commands::rank(&cfg),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::Benchmark => commands::benchmark(&cfg),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => e.report(),
    }
}
