//! TF-IDF rankings enriched with word-embedding similarity (TFW2V).
//!
//! Each document keeps its strongest TF-IDF features (weight at least
//! `min_weight`, at most `max_term` of them). For every (query, neighbor)
//! pair of a TF-IDF ranking, the cosine between the mean embeddings of the
//! two feature sets is blended into the TF-IDF score:
//!
//! ```text
//! new_score = (wv_score * alpha + sim_score) / (1 + alpha)
//! ```
//!
//! and the row is re-sorted. When either feature set has no embedded term,
//! the TF-IDF score is kept as is.

use rayon::prelude::*;

use crate::embeddings::{mean_vector, set_similarity, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::ranking::{id_order, sort_row, Neighbor, SimilarityRanking};
use crate::vectorize::{dense_dot, dense_norm, rank_all, SparseVector, TermId, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfwParams {
    pub min_weight: f64,
    pub max_term: usize,
    pub alpha: f64,
}

impl Default for TfwParams {
    fn default() -> Self {
        TfwParams {
            min_weight: 0.08,
            max_term: 20,
            alpha: 0.1,
        }
    }
}

impl TfwParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_weight) {
            return Err(Error::InvalidConfig(format!(
                "min_weight must lie in [0, 1], got {}",
                self.min_weight
            )));
        }
        if self.max_term == 0 {
            return Err(Error::InvalidConfig("max_term must be at least 1".into()));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// A document's strongest features, by descending weight.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSet {
    entries: Vec<(TermId, f64)>,
}

impl FeatureSet {
    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn terms<'v>(&self, vocab: &'v Vocabulary) -> Vec<&'v str> {
        self.entries.iter().map(|&(t, _)| vocab.term(t)).collect()
    }
}

/// Sorts by weight (ties by term id), drops weights below `min_weight`,
/// keeps at most `max_term`.
pub fn select_features(v: &SparseVector, params: &TfwParams) -> FeatureSet {
    let mut entries: Vec<(TermId, f64)> = v
        .entries()
        .iter()
        .copied()
        .filter(|&(_, w)| w >= params.min_weight)
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    entries.truncate(params.max_term);
    FeatureSet { entries }
}

#[inline]
pub fn new_score(wv_score: f64, sim_score: f64, alpha: f64) -> f64 {
    (wv_score * alpha + sim_score) / (1.0 + alpha)
}

/// Re-scores one TF-IDF row by calling [`set_similarity`] for every pair.
///
/// This is the direct form of the algorithm; [`rerank`] computes the same
/// scores with per-document mean vectors computed once.
pub fn enrich_ranking(
    query_features: &FeatureSet,
    tfidf_row: &[Neighbor],
    all_features: &[FeatureSet],
    vocab: &Vocabulary,
    emb: &EmbeddingMatrix,
    alpha: f64,
    ids: &[String],
) -> Vec<Neighbor> {
    let query_terms = query_features.terms(vocab);
    let mut row: Vec<Neighbor> = tfidf_row
        .iter()
        .map(|nb| {
            let neighbor_terms = all_features[nb.index].terms(vocab);
            let score = match set_similarity(&query_terms, &neighbor_terms, emb) {
                Some(wv) => new_score(wv, nb.score, alpha),
                None => nb.score,
            };
            Neighbor {
                index: nb.index,
                score,
            }
        })
        .collect();
    sort_row(&mut row, &id_order(ids));
    row
}

/// Mean embedding of each document's selected features, with its norm.
struct FeatureMeans {
    means: Vec<Option<(Vec<f64>, f64)>>,
}

impl FeatureMeans {
    fn new(features: &[FeatureSet], vocab: &Vocabulary, emb: &EmbeddingMatrix) -> Self {
        let means = features
            .par_iter()
            .map(|f| {
                mean_vector(&f.terms(vocab), emb).map(|m| {
                    let norm = dense_norm(&m);
                    (m, norm)
                })
            })
            .collect();
        FeatureMeans { means }
    }

    /// Same value as `set_similarity` on the two feature sets.
    #[inline]
    fn similarity(&self, a: usize, b: usize) -> Option<f64> {
        let (ma, na) = self.means[a].as_ref()?;
        let (mb, nb) = self.means[b].as_ref()?;
        let denom = na * nb;
        Some(if denom == 0.0 { 0.0 } else { dense_dot(ma, mb) / denom })
    }
}

/// Enriches every row of a full TF-IDF ranking.
///
/// With `candidate_cutoff = Some(k)` only the first `k` neighbors of each
/// row are re-scored and re-sorted; the rest follow in TF-IDF order with
/// their TF-IDF scores.
pub fn rerank(
    tfidf: &SimilarityRanking,
    tfidf_vectors: &[SparseVector],
    vocab: &Vocabulary,
    emb: &EmbeddingMatrix,
    params: &TfwParams,
    candidate_cutoff: Option<usize>,
) -> SimilarityRanking {
    let features: Vec<FeatureSet> = tfidf_vectors
        .iter()
        .map(|v| select_features(v, params))
        .collect();
    let means = FeatureMeans::new(&features, vocab, emb);
    let order = id_order(tfidf.ids());
    let rows = tfidf
        .rows()
        .par_iter()
        .enumerate()
        .map(|(q, row)| {
            let k = candidate_cutoff.unwrap_or(row.len()).min(row.len());
            let mut head: Vec<Neighbor> = row[..k]
                .iter()
                .map(|nb| Neighbor {
                    index: nb.index,
                    score: match means.similarity(q, nb.index) {
                        Some(wv) => new_score(wv, nb.score, params.alpha),
                        None => nb.score,
                    },
                })
                .collect();
            sort_row(&mut head, &order);
            head.extend_from_slice(&row[k..]);
            head
        })
        .collect();
    SimilarityRanking::from_rows(tfidf.ids().to_vec(), rows)
}

/// TF-IDF ranking followed by enrichment, truncated to `top_n`.
pub fn tfw2v_rank_all(
    ids: &[String],
    tfidf_vectors: &[SparseVector],
    vocab: &Vocabulary,
    emb: &EmbeddingMatrix,
    params: &TfwParams,
    candidate_cutoff: Option<usize>,
    top_n: Option<usize>,
) -> SimilarityRanking {
    let tfidf = rank_all(ids, tfidf_vectors, None);
    rerank(&tfidf, tfidf_vectors, vocab, emb, params, candidate_cutoff).truncated(top_n)
}
