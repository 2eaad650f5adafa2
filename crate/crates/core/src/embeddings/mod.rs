//! Word embeddings (skip-gram with negative sampling) and PV-DBOW document
//! embeddings, trained from the corpus itself.

mod kernel;
mod noise;
mod pvdbow;
mod sgns;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::TokenizedDocument;
use crate::error::{Error, Result};
use crate::vectorize::cosine_dense;

pub use noise::NoiseSampler;
pub use pvdbow::{train_pvdbow, train_pvdbow_with_stats};
pub use sgns::{train_sgns, train_sgns_with_stats};

/// How training updates are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    /// One worker, bit-reproducible for a given seed.
    #[default]
    Deterministic,
    /// Lock-free updates from several workers; not bit-reproducible.
    Parallel { workers: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: usize,
    pub initial_lr: f32,
    pub final_lr: f32,
    pub seed: u64,
    pub mode: TrainMode,
}

impl TrainConfig {
    /// Skip-gram defaults: 128 dimensions, window 5, 5 negatives, 20 epochs.
    pub fn word() -> Self {
        TrainConfig {
            dim: 128,
            window: 5,
            negatives: 5,
            epochs: 20,
            min_count: 2,
            initial_lr: 0.025,
            final_lr: 0.0001,
            seed: 1,
            mode: TrainMode::Deterministic,
        }
    }

    /// PV-DBOW defaults: 100 dimensions, 5 negatives, 30 epochs.
    pub fn doc() -> Self {
        TrainConfig {
            dim: 100,
            epochs: 30,
            ..TrainConfig::word()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.final_lr > 0.0 && self.initial_lr > self.final_lr) {
            return fail("need initial_lr > final_lr > 0");
        }
        if let TrainMode::Parallel { workers: 0 } = self.mode {
            return fail("parallel mode needs at least one worker");
        }
        Ok(())
    }

    pub(crate) fn workers(&self) -> usize {
        match self.mode {
            TrainMode::Deterministic => 1,
            TrainMode::Parallel { workers } => workers,
        }
    }
}

/// Summary of a training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    /// Learning rate used for the last update.
    pub last_lr: f32,
    /// Number of positions processed across all epochs.
    pub positions: u64,
}

/// Word vectors keyed by term.
///
/// `output` holds the context weights learned alongside the input vectors.
/// It is empty for matrices loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
}

impl EmbeddingMatrix {
    pub(crate) fn new(terms: Vec<String>, dim: usize, input: Vec<f32>, output: Vec<f32>) -> Self {
        assert_eq!(input.len(), terms.len() * dim);
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        EmbeddingMatrix {
            terms,
            index,
            dim,
            input,
            output,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn vector(&self, term: &str) -> Option<&[f32]> {
        self.index_of(term).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn input_vectors(&self) -> &[f32] {
        &self.input
    }

    pub fn output_vectors(&self) -> &[f32] {
        &self.output
    }

    /// Copy with every input vector multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        let mut out = self.clone();
        out.input.iter_mut().for_each(|x| *x *= factor);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        save_vectors(path.as_ref(), &self.terms, self.dim, &self.input)
    }

    pub fn load_text(path: impl AsRef<Path>) -> Result<Self> {
        let (terms, dim, input) = load_vectors(path.as_ref())?;
        Ok(EmbeddingMatrix::new(terms, dim, input, Vec::new()))
    }
}

/// One trained vector per document, in training order.
#[derive(Debug, Clone, PartialEq)]
pub struct DocEmbeddings {
    ids: Vec<String>,
    dim: usize,
    vectors: Vec<f32>,
}

impl DocEmbeddings {
    pub(crate) fn new(ids: Vec<String>, dim: usize, vectors: Vec<f32>) -> Self {
        assert_eq!(vectors.len(), ids.len() * dim);
        DocEmbeddings { ids, dim, vectors }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.vectors.iter().all(|x| x.is_finite())
    }

    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        save_vectors(path.as_ref(), &self.ids, self.dim, &self.vectors)
    }

    pub fn load_text(path: impl AsRef<Path>) -> Result<Self> {
        let (ids, dim, vectors) = load_vectors(path.as_ref())?;
        Ok(DocEmbeddings::new(ids, dim, vectors))
    }
}

/// Mean of the input vectors of the in-vocabulary `terms`, or `None` if
/// there are none.
pub fn mean_vector<S: AsRef<str>>(terms: &[S], emb: &EmbeddingMatrix) -> Option<Vec<f64>> {
    let mut sum = vec![0.0f64; emb.dim()];
    let mut count = 0usize;
    for term in terms {
        if let Some(v) = emb.vector(term.as_ref()) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += x as f64;
            }
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    let n = count as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Some(sum)
}

/// Cosine between the mean vectors of two term sets.
///
/// Out-of-vocabulary terms are ignored. Returns `None` when either set has
/// no in-vocabulary term, so callers can choose their own fallback.
pub fn set_similarity<A: AsRef<str>, B: AsRef<str>>(
    terms_a: &[A],
    terms_b: &[B],
    emb: &EmbeddingMatrix,
) -> Option<f64> {
    let a = mean_vector(terms_a, emb)?;
    let b = mean_vector(terms_b, emb)?;
    Some(cosine_dense(&a, &b))
}

/// Vocabulary kept for training: terms with at least `min_count`
/// occurrences, ordered by descending count then term.
pub(crate) struct TrainVocab {
    pub terms: Vec<String>,
    pub counts: Vec<u64>,
    /// Each document as a sequence of vocabulary indices.
    pub sequences: Vec<Vec<u32>>,
}

impl TrainVocab {
    pub fn build(docs: &[TokenizedDocument], min_count: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in docs {
            for t in &doc.tokens {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count as u64)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let index: HashMap<&str, u32> = kept
            .iter()
            .enumerate()
            .map(|(i, &(t, _))| (t, i as u32))
            .collect();
        let sequences = docs
            .iter()
            .map(|d| {
                d.tokens
                    .iter()
                    .filter_map(|t| index.get(t.as_str()).copied())
                    .collect()
            })
            .collect();
        Ok(TrainVocab {
            terms: kept.iter().map(|&(t, _)| t.to_owned()).collect(),
            counts: kept.iter().map(|&(_, c)| c).collect(),
            sequences,
        })
    }
}

fn save_vectors(path: &Path, names: &[String], dim: usize, values: &[f32]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{} {}", names.len(), dim)?;
        for (i, name) in names.iter().enumerate() {
            out.write_all(name.as_bytes())?;
            for x in &values[i * dim..(i + 1) * dim] {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

fn load_vectors(path: &Path) -> Result<(Vec<String>, usize, Vec<f32>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?
        .map_err(|e| Error::io(path, e))?;
    let header: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| err(1, format!("bad header {header:?}")))?;
    let [count, dim] = header[..] else {
        return Err(err(1, "header must be \"count dim\"".into()));
    };
    let mut names = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count * dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        // Names may contain spaces; the last `dim` fields are the values.
        let mut fields: Vec<&str> = line.rsplitn(dim + 1, ' ').collect();
        if fields.len() != dim + 1 {
            return Err(err(line_no, format!("expected {dim} values")));
        }
        let name = fields.pop().expect("dim + 1 fields");
        for f in fields.iter().rev() {
            values.push(
                f.parse::<f32>()
                    .map_err(|_| err(line_no, format!("bad value {f:?}")))?,
            );
        }
        names.push(name.to_owned());
    }
    if names.len() != count {
        return Err(err(0, format!("header says {count} rows, found {}", names.len())));
    }
    Ok((names, dim, values))
}
