use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{avgwv_vectors, doc2vec_vectors, rank_dense};
use crate::corpus::{filter_by_length, sample_datasets, tokenize_all, DatasetSpec, Document, StopWords, TokenizedDocument};
use crate::embeddings::{train_pvdbow, train_sgns, EmbeddingMatrix, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{build_ground_truth, evaluate, Brevity, EvalReport};
use crate::ranking::SimilarityRanking;
use crate::tfw2v::{rerank, TfwParams};
use crate::vectorize::{build_vocabulary, rank_all, tfidf_vectors, SparseVector, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Tfidf,
    AvgWv,
    Doc2Vec,
    Tfw2v,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Tfidf, Method::AvgWv, Method::Doc2Vec, Method::Tfw2v];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tfidf => "tfidf",
            Method::AvgWv => "avgwv",
            Method::Doc2Vec => "d2v",
            Method::Tfw2v => "tfw2v",
        }
    }

    fn needs_word_vectors(self) -> bool {
        matches!(self, Method::AvgWv | Method::Tfw2v)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?} (expected tfidf, avgwv, d2v or tfw2v)")))
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkParams {
    pub tfw: TfwParams,
    pub word: TrainConfig,
    pub doc: TrainConfig,
    pub stopwords: StopWords,
    pub top_n: Vec<usize>,
    pub brevity: Brevity,
    pub candidate_cutoff: Option<usize>,
    /// When set, TfwParams are picked from this grid by mean precision at the
    /// first `top_n` on dataset 1, then held fixed for every dataset.
    pub tune_grid: Option<Vec<TfwParams>>,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        BenchmarkParams {
            tfw: TfwParams::default(),
            word: TrainConfig::word(),
            doc: TrainConfig::doc(),
            stopwords: StopWords::finnish(),
            top_n: vec![30, 100],
            brevity: Brevity::Penalize,
            candidate_cutoff: None,
            tune_grid: None,
        }
    }
}

impl BenchmarkParams {
    pub fn validate(&self) -> Result<()> {
        self.tfw.validate()?;
        self.word.validate()?;
        self.doc.validate()?;
        if self.top_n.is_empty() || self.top_n.contains(&0) {
            return Err(Error::InvalidConfig("top_n values must be at least 1".into()));
        }
        if let Some(grid) = &self.tune_grid {
            grid.iter().try_for_each(TfwParams::validate)?;
        }
        Ok(())
    }

    /// Training configs for dataset `k` (1-based): the seeds are offset by
    /// `k - 1` so each dataset gets its own models.
    pub fn configs_for(&self, dataset: usize) -> (TrainConfig, TrainConfig) {
        let offset = dataset.saturating_sub(1) as u64;
        let word = TrainConfig {
            seed: self.word.seed.wrapping_add(offset),
            ..self.word.clone()
        };
        let doc = TrainConfig {
            seed: self.doc.seed.wrapping_add(offset),
            ..self.doc.clone()
        };
        (word, doc)
    }

    /// `key = value` lines describing every parameter.
    pub fn describe(&self) -> Vec<String> {
        let cfg = |prefix: &str, c: &TrainConfig| {
            format!(
                "{prefix}: dim={} window={} negatives={} epochs={} min_count={} initial_lr={} final_lr={} seed={} mode={:?}",
                c.dim, c.window, c.negatives, c.epochs, c.min_count, c.initial_lr, c.final_lr, c.seed, c.mode
            )
        };
        vec![
            format!(
                "tfw2v: min_weight={} max_term={} alpha={} candidate_cutoff={}",
                self.tfw.min_weight,
                self.tfw.max_term,
                self.tfw.alpha,
                self.candidate_cutoff.map_or("all".into(), |k| k.to_string())
            ),
            cfg("word", &self.word),
            cfg("doc", &self.doc),
            format!(
                "eval: top_n={:?} brevity={:?} stopwords={}",
                self.top_n,
                self.brevity,
                self.stopwords.len()
            ),
        ]
    }
}

/// Tokens, vocabulary and TF-IDF vectors of one dataset, plus models
/// trained on demand.
pub struct DatasetModels {
    pub ids: Vec<String>,
    pub tokens: Vec<TokenizedDocument>,
    pub vocab: Vocabulary,
    pub tfidf: Vec<SparseVector>,
    word: Option<EmbeddingMatrix>,
    tfidf_ranking: Option<SimilarityRanking>,
}

impl DatasetModels {
    pub fn new(docs: &[Document], stopwords: &StopWords) -> Result<Self> {
        let tokens = tokenize_all(docs, stopwords);
        let vocab = build_vocabulary(&tokens)?;
        let tfidf = tfidf_vectors(&tokens, &vocab);
        Ok(DatasetModels {
            ids: docs.iter().map(|d| d.id.clone()).collect(),
            tokens,
            vocab,
            tfidf,
            word: None,
            tfidf_ranking: None,
        })
    }

    pub fn word_vectors(&mut self, config: &TrainConfig) -> Result<&EmbeddingMatrix> {
        if self.word.is_none() {
            self.word = Some(train_sgns(&self.tokens, config)?);
        }
        Ok(self.word.as_ref().expect("just trained"))
    }

    pub fn tfidf_ranking(&mut self) -> &SimilarityRanking {
        self.tfidf_ranking
            .get_or_insert_with(|| rank_all(&self.ids, &self.tfidf, None))
    }

    /// Full (untruncated) ranking for `method`.
    pub fn rank(
        &mut self,
        method: Method,
        word: &TrainConfig,
        doc: &TrainConfig,
        tfw: &TfwParams,
        candidate_cutoff: Option<usize>,
    ) -> Result<SimilarityRanking> {
        if method.needs_word_vectors() {
            self.word_vectors(word)?;
        }
        Ok(match method {
            Method::Tfidf => self.tfidf_ranking().clone(),
            Method::AvgWv => {
                let emb = self.word.as_ref().expect("trained above");
                rank_dense(&avgwv_vectors(&self.ids, &self.tfidf, &self.vocab, emb), None)
            }
            Method::Doc2Vec => rank_dense(&doc2vec_vectors(&train_pvdbow(&self.tokens, doc)?), None),
            Method::Tfw2v => {
                self.tfidf_ranking();
                let emb = self.word.as_ref().expect("trained above");
                let base = self.tfidf_ranking.as_ref().expect("ranked above");
                rerank(base, &self.tfidf, &self.vocab, emb, tfw, candidate_cutoff)
            }
        })
    }
}

/// Trains, ranks and scores every method on one dataset.
pub fn evaluate_dataset(
    dataset: usize,
    docs: &[Document],
    methods: &[Method],
    params: &BenchmarkParams,
    tfw: &TfwParams,
) -> Result<Vec<EvalReport>> {
    let ctx = |e: Error, what: &str| e.context(format!("dataset {dataset}: {what}"));
    let (word, doc) = params.configs_for(dataset);
    let truth = build_ground_truth(docs, params.brevity).map_err(|e| ctx(e, "ground truth"))?;
    let tags: Vec<Vec<String>> = docs.iter().map(|d| d.tags.clone()).collect();
    let mut models = DatasetModels::new(docs, &params.stopwords).map_err(|e| ctx(e, "vectorize"))?;
    methods
        .iter()
        .map(|&m| {
            let ranking = models
                .rank(m, &word, &doc, tfw, params.candidate_cutoff)
                .map_err(|e| ctx(e, m.as_str()))?;
            evaluate(m.as_str(), dataset, &ranking, &truth, &tags, &params.top_n)
                .map_err(|e| ctx(e, m.as_str()))
        })
        .collect()
}

/// Picks the grid entry with the best mean TFW2V precision at the first
/// `top_n` on `docs`, training the word vectors once.
pub fn tune_tfw_params(docs: &[Document], grid: &[TfwParams], params: &BenchmarkParams) -> Result<TfwParams> {
    let first = grid
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidConfig("empty tuning grid".into()))?;
    let (word, doc) = params.configs_for(1);
    let truth = build_ground_truth(docs, params.brevity)?;
    let tags: Vec<Vec<String>> = docs.iter().map(|d| d.tags.clone()).collect();
    let mut models = DatasetModels::new(docs, &params.stopwords)?;
    let n = params.top_n[0];
    let mut best = (f64::NEG_INFINITY, first);
    for candidate in grid {
        let ranking = models.rank(Method::Tfw2v, &word, &doc, candidate, params.candidate_cutoff)?;
        let report = evaluate("tfw2v", 1, &ranking, &truth, &tags, &[n])?;
        let precision = report.metrics[0].precision_mean;
        if precision > best.0 {
            best = (precision, *candidate);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub datasets: Vec<Vec<Document>>,
    pub methods: Vec<Method>,
    pub params: BenchmarkParams,
    /// TfwParams actually applied (tuned on dataset 1 when a grid is set).
    pub tfw: TfwParams,
    pub reports: Vec<EvalReport>,
}

impl BenchmarkRun {
    /// Mean over datasets of `method`'s precision at `n`.
    pub fn mean_precision(&self, method: Method, n: usize) -> Option<f64> {
        let values: Vec<f64> = self
            .reports
            .iter()
            .filter(|r| r.method == method.as_str())
            .flat_map(|r| r.metrics.iter().filter(|m| m.n == n).map(|m| m.precision_mean))
            .collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W, spec: &DatasetSpec) -> std::io::Result<()> {
        let mut comments = vec![format!(
            "datasets: min_words={} max_words={} dataset_size={} num_datasets={} seed={}",
            spec.min_words, spec.max_words, spec.dataset_size, spec.num_datasets, spec.seed
        )];
        comments.push(format!(
            "methods: {}",
            self.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(",")
        ));
        comments.extend(self.params.describe());
        comments.push(format!(
            "applied tfw2v: min_weight={} max_term={} alpha={}",
            self.tfw.min_weight, self.tfw.max_term, self.tfw.alpha
        ));
        crate::eval::write_report_csv(out, &comments, &self.reports)
    }
}

/// Filters the corpus by length, samples disjoint datasets and evaluates
/// every method on each of them. Models are trained per dataset.
pub fn run_benchmark(
    corpus: &[Document],
    spec: &DatasetSpec,
    methods: &[Method],
    params: &BenchmarkParams,
) -> Result<BenchmarkRun> {
    params.validate()?;
    let filtered = filter_by_length(corpus, spec);
    let datasets = sample_datasets(&filtered, spec)?;
    let tfw = match &params.tune_grid {
        Some(grid) => tune_tfw_params(&datasets[0], grid, params).map_err(|e| e.context("tuning on dataset 1"))?,
        None => params.tfw,
    };
    let per_dataset: Vec<Vec<EvalReport>> = datasets
        .par_iter()
        .enumerate()
        .map(|(k, docs)| evaluate_dataset(k + 1, docs, methods, params, &tfw))
        .collect::<Result<_>>()?;
    // Dataset-major order: every method for dataset 1, then dataset 2, ...
    let reports = per_dataset.into_iter().flatten().collect();
    Ok(BenchmarkRun {
        datasets,
        methods: methods.to_vec(),
        params: params.clone(),
        tfw,
        reports,
    })
}
