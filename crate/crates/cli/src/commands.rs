//! One function per subcommand. Each returns its one-line summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use docsim::baselines::{avgwv_vectors, doc2vec_vectors, rank_dense};
use docsim::corpus::{
    filter_by_length, load_corpus, sample_datasets, tokenize_all, write_corpus, Document, StopWords,
};
use docsim::embeddings::{train_pvdbow, train_sgns, DocEmbeddings, EmbeddingMatrix};
use docsim::eval::{build_ground_truth, evaluate as score, write_report_csv, EvalReport};
use docsim::harness::{generate_synthetic, run_benchmark, BenchmarkParams, Method};
use docsim::ranking::SimilarityRanking;
use docsim::tfw2v::tfw2v_rank_all;
use docsim::vectorize::{build_vocabulary, rank_all, tfidf_vectors, Vocabulary};
use docsim::Error;

use crate::config::RunConfig;

const VOCAB_FILE: &str = "vocab.tsv";
const WORD_VECTORS_FILE: &str = "word_vectors.txt";
const DOC_VECTORS_FILE: &str = "doc_vectors.txt";
const REPORT_FILE: &str = "report.csv";

pub enum Failure {
    Config(String),
    Missing(PathBuf),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(msg) => Failure::Config(msg),
            other => Failure::Run(other),
        }
    }
}

impl Failure {
    pub fn report(self) -> ExitCode {
        match self {
            Failure::Config(msg) => {
                eprintln!("error: invalid configuration: {msg}");
                ExitCode::from(1)
            }
            Failure::Missing(path) => {
                eprintln!("error: missing input file {}", path.display());
                ExitCode::from(2)
            }
            Failure::Run(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        }
    }
}

type CmdResult = Result<String, Failure>;

fn require(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Missing(path.to_path_buf()))
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Run(Error::Io { path: dir.to_path_buf(), source: e }))
}

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Run(Error::Io { path: path.to_path_buf(), source: e })
}

/// Records the effective configuration next to `artifact`.
fn write_params(artifact: &Path, cfg: &RunConfig) -> Result<(), Failure> {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".params");
    let path = PathBuf::from(name);
    fs::write(&path, cfg.to_text()).map_err(io_failure(&path))
}

fn stopwords(cfg: &RunConfig) -> Result<StopWords, Failure> {
    match &cfg.stopwords {
        Some(path) => {
            require(path)?;
            Ok(StopWords::from_path(path)?)
        }
        None => Ok(StopWords::finnish()),
    }
}

fn load_dataset(cfg: &RunConfig) -> Result<Vec<Document>, Failure> {
    let path = cfg.dataset_path(cfg.dataset);
    require(&path)?;
    Ok(load_corpus(&path)?)
}

fn write_reports(path: &Path, cfg: &RunConfig, extra: &[String], reports: &[EvalReport]) -> Result<(), Failure> {
    let mut comments: Vec<String> = cfg.to_text().lines().map(str::to_owned).collect();
    comments.extend_from_slice(extra);
    let file = File::create(path).map_err(io_failure(path))?;
    let mut out = BufWriter::new(file);
    write_report_csv(&mut out, &comments, reports)
        .and_then(|_| out.flush())
        .map_err(io_failure(path))
}

fn precision_summary(reports: &[EvalReport], methods: &[Method], n: usize) -> String {
    methods
        .iter()
        .map(|m| {
            let values: Vec<f64> = reports
                .iter()
                .filter(|r| r.method == m.as_str())
                .flat_map(|r| r.metrics.iter().filter(|x| x.n == n).map(|x| x.precision_mean))
                .collect();
            let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
            format!("{m}={mean:.4}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn generate(cfg: &RunConfig) -> CmdResult {
    let docs = generate_synthetic(&cfg.synthetic)?;
    let path = cfg.corpus_path();
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    write_corpus(&path, &docs)?;
    write_params(&path, cfg)?;
    Ok(format!(
        "generated {} documents over {} topics -> {}",
        docs.len(),
        cfg.synthetic.num_topics,
        path.display()
    ))
}

pub fn sample(cfg: &RunConfig) -> CmdResult {
    let corpus_path = cfg.corpus_path();
    require(&corpus_path)?;
    let corpus = load_corpus(&corpus_path)?;
    let filtered = filter_by_length(&corpus, &cfg.datasets);
    let datasets = sample_datasets(&filtered, &cfg.datasets)?;
    create_dir(&cfg.output_dir)?;
    for (k, docs) in datasets.iter().enumerate() {
        let path = cfg.dataset_path(k + 1);
        write_corpus(&path, docs)?;
        write_params(&path, cfg)?;
    }
    Ok(format!(
        "sampled {} datasets of {} documents from {} of {} documents -> {}",
        datasets.len(),
        cfg.datasets.dataset_size,
        filtered.len(),
        corpus.len(),
        cfg.output_dir.display()
    ))
}

pub fn train(cfg: &RunConfig) -> CmdResult {
    let docs = load_dataset(cfg)?;
    let tokens = tokenize_all(&docs, &stopwords(cfg)?);
    let dir = cfg.model_dir();
    create_dir(&dir)?;

    let vocab = build_vocabulary(&tokens)?;
    let vocab_path = dir.join(VOCAB_FILE);
    vocab.save_tsv(&vocab_path)?;
    write_params(&vocab_path, cfg)?;
    let mut trained = vec![VOCAB_FILE];

    if cfg.methods.iter().any(|m| matches!(m, Method::AvgWv | Method::Tfw2v)) {
        eprintln!("training word vectors on {} documents", docs.len());
        let path = dir.join(WORD_VECTORS_FILE);
        train_sgns(&tokens, &cfg.word)?.save_text(&path)?;
        write_params(&path, cfg)?;
        trained.push(WORD_VECTORS_FILE);
    }
    if cfg.methods.contains(&Method::Doc2Vec) {
        eprintln!("training document vectors on {} documents", docs.len());
        let path = dir.join(DOC_VECTORS_FILE);
        train_pvdbow(&tokens, &cfg.doc)?.save_text(&path)?;
        write_params(&path, cfg)?;
        trained.push(DOC_VECTORS_FILE);
    }
    Ok(format!(
        "dataset {}: wrote {} ({} terms) -> {}",
        cfg.dataset,
        trained.join(", "),
        vocab.len(),
        dir.display()
    ))
}

fn ranking_path(dir: &Path, method: Method) -> PathBuf {
    dir.join(format!("rankings_{method}.tsv"))
}

pub fn rank(cfg: &RunConfig) -> CmdResult {
    let docs = load_dataset(cfg)?;
    let dir = cfg.model_dir();
    let vocab_path = dir.join(VOCAB_FILE);
    require(&vocab_path)?;
    let word_path = dir.join(WORD_VECTORS_FILE);
    let doc_path = dir.join(DOC_VECTORS_FILE);
    for m in &cfg.methods {
        match m {
            Method::AvgWv | Method::Tfw2v => require(&word_path)?,
            Method::Doc2Vec => require(&doc_path)?,
            Method::Tfidf => {}
        }
    }

    let vocab = Vocabulary::load_tsv(&vocab_path)?;
    if vocab.num_docs() != docs.len() {
        return Err(Error::CorpusMismatch(format!(
            "{} was built from {} documents, dataset {} has {}",
            vocab_path.display(),
            vocab.num_docs(),
            cfg.dataset,
            docs.len()
        ))
        .into());
    }
    let tokens = tokenize_all(&docs, &stopwords(cfg)?);
    let tfidf = tfidf_vectors(&tokens, &vocab);
    let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    let top = cfg.top_n.iter().copied().max();
    let mut word: Option<EmbeddingMatrix> = None;

    for &method in &cfg.methods {
        let ranking = match method {
            Method::Tfidf => rank_all(&ids, &tfidf, top),
            Method::AvgWv | Method::Tfw2v => {
                if word.is_none() {
                    word = Some(EmbeddingMatrix::load_text(&word_path)?);
                }
                let emb = word.as_ref().expect("loaded above");
                if method == Method::AvgWv {
                    rank_dense(&avgwv_vectors(&ids, &tfidf, &vocab, emb), top)
                } else {
                    tfw2v_rank_all(&ids, &tfidf, &vocab, emb, &cfg.tfw, cfg.candidate_cutoff, top)
                }
            }
            Method::Doc2Vec => {
                let emb = DocEmbeddings::load_text(&doc_path)?;
                if emb.ids() != ids.as_slice() {
                    return Err(Error::CorpusMismatch(format!(
                        "{} does not list the documents of dataset {} in order",
                        doc_path.display(),
                        cfg.dataset
                    ))
                    .into());
                }
                rank_dense(&doc2vec_vectors(&emb), top)
            }
        };
        let path = ranking_path(&dir, method);
        ranking.save_tsv(&path)?;
        write_params(&path, cfg)?;
    }
    Ok(format!(
        "dataset {}: ranked {} documents with {} (top {}) -> {}",
        cfg.dataset,
        ids.len(),
        cfg.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(", "),
        top.unwrap_or(0),
        dir.display()
    ))
}

pub fn evaluate(cfg: &RunConfig) -> CmdResult {
    let docs = load_dataset(cfg)?;
    let dir = cfg.model_dir();
    let paths: Vec<PathBuf> = cfg.methods.iter().map(|&m| ranking_path(&dir, m)).collect();
    paths.iter().try_for_each(|p| require(p))?;

    let truth = build_ground_truth(&docs, cfg.brevity)?;
    let tags: Vec<Vec<String>> = docs.iter().map(|d| d.tags.clone()).collect();
    let reports = cfg
        .methods
        .iter()
        .zip(&paths)
        .map(|(m, path)| {
            let ranking = SimilarityRanking::load_tsv(path)?;
            score(m.as_str(), cfg.dataset, &ranking, &truth, &tags, &cfg.top_n)
                .map_err(|e| e.context(path.display().to_string()))
        })
        .collect::<docsim::Result<Vec<_>>>()?;
    let path = dir.join(REPORT_FILE);
    write_reports(&path, cfg, &[], &reports)?;
    Ok(format!(
        "dataset {}: P@{} {} -> {}",
        cfg.dataset,
        cfg.top_n[0],
        precision_summary(&reports, &cfg.methods, cfg.top_n[0]),
        path.display()
    ))
}

pub fn benchmark(cfg: &RunConfig) -> CmdResult {
    let corpus_path = cfg.corpus_path();
    require(&corpus_path)?;
    let corpus = load_corpus(&corpus_path)?;
    let params = BenchmarkParams {
        tfw: cfg.tfw,
        word: cfg.word.clone(),
        doc: cfg.doc.clone(),
        stopwords: stopwords(cfg)?,
        top_n: cfg.top_n.clone(),
        brevity: cfg.brevity,
        candidate_cutoff: cfg.candidate_cutoff,
        tune_grid: None,
    };
    eprintln!(
        "benchmarking {} methods on {} datasets",
        cfg.methods.len(),
        cfg.datasets.num_datasets
    );
    let run = run_benchmark(&corpus, &cfg.datasets, &cfg.methods, &params)?;
    create_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join(REPORT_FILE);
    write_reports(&path, cfg, &[], &run.reports)?;
    Ok(format!(
        "benchmark: {} methods x {} datasets, mean P@{} {} -> {}",
        run.methods.len(),
        run.datasets.len(),
        cfg.top_n[0],
        precision_summary(&run.reports, &run.methods, cfg.top_n[0]),
        path.display()
    ))
}
