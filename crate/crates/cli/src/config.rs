//! Flat `key = value` run configuration shared by every subcommand.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use docsim::corpus::DatasetSpec;
use docsim::embeddings::{TrainConfig, TrainMode};
use docsim::eval::Brevity;
use docsim::harness::{Method, SyntheticSpec};
use docsim::tfw2v::TfwParams;

/// Value of `--config` that selects the built-in defaults.
pub const DEFAULT_CONFIG: &str = "default";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Input corpus; `output_dir/corpus.jsonl` when unset.
    pub corpus: Option<PathBuf>,
    /// Stop word file; the built-in Finnish list when unset.
    pub stopwords: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    /// Number of synthetic documents; enough for every dataset when unset.
    pub docs: Option<usize>,
    pub datasets: DatasetSpec,
    /// 1-based dataset the train, rank and evaluate commands work on.
    pub dataset: usize,
    pub word: TrainConfig,
    pub doc: TrainConfig,
    pub tfw: TfwParams,
    pub candidate_cutoff: Option<usize>,
    pub methods: Vec<Method>,
    pub top_n: Vec<usize>,
    pub brevity: Brevity,
    pub seed: u64,
    pub workers: usize,
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("out"),
            corpus: None,
            stopwords: None,
            synthetic: SyntheticSpec::default(),
            docs: None,
            datasets: DatasetSpec::default(),
            dataset: 1,
            word: TrainConfig::word(),
            doc: TrainConfig::doc(),
            tfw: TfwParams::default(),
            candidate_cutoff: None,
            methods: Method::ALL.to_vec(),
            top_n: vec![30, 100],
            brevity: Brevity::Penalize,
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            deterministic: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| format!("invalid value {value:?} for {key}: {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String>
where
    T::Err: Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse(key, v))
        .collect()
}

fn parse_range(key: &str, value: &str) -> Result<(usize, usize), String> {
    match parse_list::<usize>(key, value)?[..] {
        [lo, hi] => Ok((lo, hi)),
        _ => Err(format!("{key} takes two values as `min,max`, got {value:?}")),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("invalid value {value:?} for {key}: expected true or false")),
    }
}

fn join<T: Display>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Reads a config file on top of the defaults. `default` selects the
    /// defaults alone.
    pub fn load(path: &str) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        if path == DEFAULT_CONFIG {
            return Ok(cfg);
        }
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {path}: {e}"))?;
        cfg.apply_text(&text).map_err(|e| format!("{path}: {e}"))?;
        Ok(cfg)
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "output_dir" => self.output_dir = PathBuf::from(value),
            "corpus" => self.corpus = Some(PathBuf::from(value)),
            "stopwords" => self.stopwords = (value != "builtin").then(|| PathBuf::from(value)),
            "num_topics" => self.synthetic.num_topics = parse(key, value)?,
            "docs" => self.docs = (value != "auto").then(|| parse(key, value)).transpose()?,
            "vocab_per_topic" => self.synthetic.vocab_per_topic = parse(key, value)?,
            "shared_vocab" => self.synthetic.shared_vocab = parse(key, value)?,
            "doc_length" => self.synthetic.doc_length = parse_range(key, value)?,
            "topic_mix" => self.synthetic.topic_mix = parse(key, value)?,
            "tags_per_doc" => self.synthetic.tags_per_doc = parse_range(key, value)?,
            "min_words" => self.datasets.min_words = parse(key, value)?,
            "max_words" => self.datasets.max_words = parse(key, value)?,
            "dataset_size" => self.datasets.dataset_size = parse(key, value)?,
            "num_datasets" => self.datasets.num_datasets = parse(key, value)?,
            "dataset" => self.dataset = parse(key, value)?,
            "alpha" => self.tfw.alpha = parse(key, value)?,
            "min_weight" => self.tfw.min_weight = parse(key, value)?,
            "max_term" => self.tfw.max_term = parse(key, value)?,
            "candidate_cutoff" => {
                self.candidate_cutoff = (value != "all").then(|| parse(key, value)).transpose()?
            }
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| v.parse::<Method>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?
            }
            "top_n" => self.top_n = parse_list(key, value)?,
            "brevity" => {
                self.brevity = match value {
                    "penalize" => Brevity::Penalize,
                    "ignore" => Brevity::Ignore,
                    _ => return Err(format!("invalid value {value:?} for brevity: expected penalize or ignore")),
                }
            }
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "deterministic" => self.deterministic = parse_bool(key, value)?,
            _ => {
                if let Some(field) = key.strip_prefix("word_") {
                    return set_train(&mut self.word, key, field, value);
                }
                if let Some(field) = key.strip_prefix("doc_") {
                    return set_train(&mut self.doc, key, field, value);
                }
                return Err(format!("unknown config key {key:?}"));
            }
        }
        Ok(())
    }

    /// Checks values the library does not validate itself.
    pub fn validate(&self) -> Result<(), String> {
        if self.methods.is_empty() {
            return Err("methods must name at least one method".into());
        }
        if self.top_n.is_empty() || self.top_n.contains(&0) {
            return Err("top_n values must be at least 1".into());
        }
        if self.workers == 0 {
            return Err("workers must be at least 1".into());
        }
        if self.dataset == 0 {
            return Err("dataset numbers start at 1".into());
        }
        if self.candidate_cutoff == Some(0) {
            return Err("candidate_cutoff must be at least 1 or `all`".into());
        }
        let checks = [
            self.tfw.validate(),
            self.word.validate(),
            self.doc.validate(),
            self.datasets.validate(),
        ];
        checks.into_iter().collect::<docsim::Result<()>>().map_err(|e| e.to_string())
    }

    /// Spreads `seed`, `workers` and `deterministic` into the library
    /// configs.
    pub fn resolve(&mut self) {
        self.synthetic.seed = self.seed;
        self.synthetic.docs = self
            .docs
            .unwrap_or(self.datasets.dataset_size * self.datasets.num_datasets);
        self.datasets.seed = self.seed;
        let mode = if self.deterministic || self.workers <= 1 {
            TrainMode::Deterministic
        } else {
            TrainMode::Parallel { workers: self.workers }
        };
        for c in [&mut self.word, &mut self.doc] {
            c.seed = self.seed;
            c.mode = mode;
        }
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.corpus
            .clone()
            .unwrap_or_else(|| self.output_dir.join("corpus.jsonl"))
    }

    pub fn dataset_path(&self, k: usize) -> PathBuf {
        self.output_dir.join(format!("dataset_{k}.jsonl"))
    }

    /// Directory holding the models, rankings and report of the current
    /// dataset.
    pub fn model_dir(&self) -> PathBuf {
        self.output_dir.join(format!("dataset_{}", self.dataset))
    }

    /// The full configuration in the format [`apply_text`](Self::apply_text)
    /// reads.
    pub fn to_text(&self) -> String {
        let path = |p: &Path| p.display().to_string();
        let mut lines = vec![
            format!("output_dir = {}", path(&self.output_dir)),
            format!("corpus = {}", path(&self.corpus_path())),
            format!(
                "stopwords = {}",
                self.stopwords.as_deref().map_or("builtin".into(), path)
            ),
            format!("num_topics = {}", self.synthetic.num_topics),
            format!("docs = {}", self.docs.map_or("auto".into(), |d| d.to_string())),
            format!("vocab_per_topic = {}", self.synthetic.vocab_per_topic),
            format!("shared_vocab = {}", self.synthetic.shared_vocab),
            format!("doc_length = {},{}", self.synthetic.doc_length.0, self.synthetic.doc_length.1),
            format!("topic_mix = {}", self.synthetic.topic_mix),
            format!("tags_per_doc = {},{}", self.synthetic.tags_per_doc.0, self.synthetic.tags_per_doc.1),
            format!("min_words = {}", self.datasets.min_words),
            format!("max_words = {}", self.datasets.max_words),
            format!("dataset_size = {}", self.datasets.dataset_size),
            format!("num_datasets = {}", self.datasets.num_datasets),
            format!("dataset = {}", self.dataset),
        ];
        for (prefix, c) in [("word", &self.word), ("doc", &self.doc)] {
            lines.extend([
                format!("{prefix}_dim = {}", c.dim),
                format!("{prefix}_window = {}", c.window),
                format!("{prefix}_negatives = {}", c.negatives),
                format!("{prefix}_epochs = {}", c.epochs),
                format!("{prefix}_min_count = {}", c.min_count),
                format!("{prefix}_initial_lr = {}", c.initial_lr),
                format!("{prefix}_final_lr = {}", c.final_lr),
            ]);
        }
        lines.extend([
            format!("alpha = {}", self.tfw.alpha),
            format!("min_weight = {}", self.tfw.min_weight),
            format!("max_term = {}", self.tfw.max_term),
            format!(
                "candidate_cutoff = {}",
                self.candidate_cutoff.map_or("all".into(), |k| k.to_string())
            ),
            format!("methods = {}", join(&self.methods)),
            format!("top_n = {}", join(&self.top_n)),
            format!(
                "brevity = {}",
                match self.brevity {
                    Brevity::Penalize => "penalize",
                    Brevity::Ignore => "ignore",
                }
            ),
            format!("seed = {}", self.seed),
            format!("workers = {}", self.workers),
            format!("deterministic = {}", self.deterministic),
        ]);
        lines.join("\n") + "\n"
    }
}

fn set_train(c: &mut TrainConfig, key: &str, field: &str, value: &str) -> Result<(), String> {
    match field {
        "dim" => c.dim = parse(key, value)?,
        "window" => c.window = parse(key, value)?,
        "negatives" => c.negatives = parse(key, value)?,
        "epochs" => c.epochs = parse(key, value)?,
        "min_count" => c.min_count = parse(key, value)?,
        "initial_lr" => c.initial_lr = parse(key, value)?,
        "final_lr" => c.final_lr = parse(key, value)?,
        _ => return Err(format!("unknown config key {key:?}")),
    }
    Ok(())
}
