//! Vocabulary, TF-IDF feature vectors and cosine ranking.
//!
//! A term's raw weight in a document is its relative frequency times
//! `ln(N / DF)`. The vector of raw weights is then L2-normalized, so each
//! component lies in `[0, 1]` and cosine similarity reduces to a dot product.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::TokenizedDocument;
use crate::error::{Error, Result};
use crate::ranking::{rank_with, SimilarityRanking};

pub type TermId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    term_to_id: HashMap<String, TermId>,
    terms: Vec<String>,
    df: Vec<u32>,
    num_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.term_to_id.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self, id: TermId) -> u32 {
        self.df[id as usize]
    }

    pub fn idf(&self, id: TermId) -> f64 {
        (self.num_docs as f64 / self.df(id) as f64).ln()
    }

    /// Writes a `num_docs` header line, then `term, id, df` per line.
    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            writeln!(out, "num_docs\t{}", self.num_docs)?;
            for (id, term) in self.terms.iter().enumerate() {
                writeln!(out, "{term}\t{id}\t{}", self.df[id])?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }

    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut num_docs = None;
        let mut vocab = Vocabulary {
            term_to_id: HashMap::new(),
            terms: Vec::new(),
            df: Vec::new(),
            num_docs: 0,
        };
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if num_docs.is_none() {
                match fields[..] {
                    ["num_docs", n] => {
                        num_docs = Some(
                            n.parse::<usize>()
                                .map_err(|_| err(line_no, format!("bad num_docs {n:?}")))?,
                        )
                    }
                    _ => return Err(err(line_no, "expected num_docs header".into())),
                }
                continue;
            }
            let [term, id, df] = fields[..] else {
                return Err(err(line_no, format!("expected 3 fields, got {}", fields.len())));
            };
            let id: usize = id.parse().map_err(|_| err(line_no, format!("bad id {id:?}")))?;
            let df: u32 = df.parse().map_err(|_| err(line_no, format!("bad df {df:?}")))?;
            if id != vocab.terms.len() {
                return Err(err(line_no, format!("ids must be dense, expected {}", vocab.terms.len())));
            }
            if vocab.term_to_id.insert(term.to_owned(), id as TermId).is_some() {
                return Err(err(line_no, format!("duplicate term {term:?}")));
            }
            vocab.terms.push(term.to_owned());
            vocab.df.push(df);
        }
        vocab.num_docs = num_docs.ok_or_else(|| err(1, "missing num_docs header".into()))?;
        if let Some(bad) = vocab.df.iter().position(|&d| d == 0 || d as usize > vocab.num_docs) {
            return Err(err(
                0,
                format!("df of {:?} outside [1, num_docs]", vocab.terms[bad]),
            ));
        }
        Ok(vocab)
    }
}

/// Assigns ids in order of first occurrence and counts document frequencies.
pub fn build_vocabulary(docs: &[TokenizedDocument]) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut term_to_id: HashMap<String, TermId> = HashMap::new();
    let mut terms = Vec::new();
    let mut df: Vec<u32> = Vec::new();
    // Id of the last document that counted each term.
    let mut last_seen: Vec<usize> = Vec::new();
    for (d, doc) in docs.iter().enumerate() {
        for token in &doc.tokens {
            let id = match term_to_id.get(token) {
                Some(&id) => id as usize,
                None => {
                    let id = terms.len();
                    term_to_id.insert(token.clone(), id as TermId);
                    terms.push(token.clone());
                    df.push(0);
                    last_seen.push(usize::MAX);
                    id
                }
            };
            if last_seen[id] != d {
                last_seen[id] = d;
                df[id] += 1;
            }
        }
    }
    Ok(Vocabulary {
        term_to_id,
        terms,
        df,
        num_docs: docs.len(),
    })
}

/// Sparse vector with strictly increasing term ids and non-negative weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(TermId, f64)>,
}

impl SparseVector {
    /// Sorts by term id. Panics on duplicate ids or negative weights.
    pub fn from_entries(mut entries: Vec<(TermId, f64)>) -> Self {
        entries.sort_by_key(|&(t, _)| t);
        assert!(
            entries.windows(2).all(|w| w[0].0 < w[1].0),
            "duplicate term id in sparse vector"
        );
        assert!(
            entries.iter().all(|&(_, w)| w >= 0.0),
            "negative weight in sparse vector"
        );
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn normalized(&self) -> SparseVector {
        let norm = self.norm();
        if norm == 0.0 {
            return SparseVector::default();
        }
        SparseVector {
            entries: self.entries.iter().map(|&(t, w)| (t, w / norm)).collect(),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for &(t, w) in &self.entries {
            v[t as usize] = w;
        }
        v
    }
}

/// Relative-frequency TF times `ln(N / DF)`, before normalization.
///
/// Out-of-vocabulary tokens count toward the document length but get no
/// entry. Zero weights (terms present in every document) are dropped.
pub fn tfidf_raw(doc: &TokenizedDocument, vocab: &Vocabulary) -> SparseVector {
    if doc.tokens.is_empty() {
        return SparseVector::default();
    }
    let mut counts: HashMap<TermId, u32> = HashMap::new();
    for token in &doc.tokens {
        if let Some(id) = vocab.id(token) {
            *counts.entry(id).or_default() += 1;
        }
    }
    let len = doc.tokens.len() as f64;
    let entries = counts
        .into_iter()
        .map(|(id, c)| (id, c as f64 / len * vocab.idf(id)))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    SparseVector::from_entries(entries)
}

/// L2-normalized TF-IDF vector; empty if every raw weight is zero.
pub fn tfidf_vector(doc: &TokenizedDocument, vocab: &Vocabulary) -> SparseVector {
    tfidf_raw(doc, vocab).normalized()
}

pub fn tfidf_vectors(docs: &[TokenizedDocument], vocab: &Vocabulary) -> Vec<SparseVector> {
    use rayon::prelude::*;
    docs.par_iter().map(|d| tfidf_vector(d, vocab)).collect()
}

/// Cosine similarity of two sparse vectors; 0.0 if either is zero.
pub fn cosine_sparse(a: &SparseVector, b: &SparseVector) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    a.dot(b) / denom
}

/// Cosine similarity of two dense vectors; 0.0 if either is zero.
pub fn cosine_dense(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let denom = dense_norm(a) * dense_norm(b);
    if denom == 0.0 {
        return 0.0;
    }
    dense_dot(a, b) / denom
}

pub(crate) fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dense_norm(a: &[f64]) -> f64 {
    dense_dot(a, a).sqrt()
}

/// Ranks every document against every other by sparse cosine.
///
/// Uses an inverted index: a query's dot products are accumulated over its
/// terms in ascending term-id order, the same order as [`SparseVector::dot`],
/// so each score equals `cosine_sparse(query, neighbor)` bit for bit.
pub fn rank_all(ids: &[String], vectors: &[SparseVector], top_n: Option<usize>) -> SimilarityRanking {
    assert_eq!(ids.len(), vectors.len());
    let dim = vectors
        .iter()
        .filter_map(|v| v.entries.last().map(|&(t, _)| t as usize + 1))
        .max()
        .unwrap_or(0);
    let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
    for (d, v) in vectors.iter().enumerate() {
        for &(t, w) in &v.entries {
            postings[t as usize].push((d as u32, w));
        }
    }
    let norms: Vec<f64> = vectors.iter().map(SparseVector::norm).collect();
    rank_with(ids, top_n, |q, scores| {
        for &(t, wq) in &vectors[q].entries {
            for &(d, wd) in &postings[t as usize] {
                scores[d as usize] += wq * wd;
            }
        }
        for (d, s) in scores.iter_mut().enumerate() {
            let denom = norms[q] * norms[d];
            *s = if denom == 0.0 { 0.0 } else { *s / denom };
        }
    })
}
