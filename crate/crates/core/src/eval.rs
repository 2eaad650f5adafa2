//! Tag-based ground truth and ranking metrics.
//!
//! The ground truth orders, for every document, all other documents by the
//! unigram BLEU of their keyword tags (query tags as candidate, neighbor
//! tags as reference). Three metrics compare a predicted ranking with it at
//! cut-off `n`:
//!
//! * precision: overlap of the predicted and true top-`n` sets, over `n`;
//! * BLEU: mean tag BLEU between the query and its predicted top-`n`,
//!   summed over all queries of a dataset;
//! * ranking loss: mean absolute difference between the predicted rank and
//!   the true rank of each predicted top-`n` document, divided by the
//!   dataset size.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::ranking::{rank_with, Neighbor, SimilarityRanking};

/// Whether BLEU multiplies in the brevity penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Brevity {
    #[default]
    Penalize,
    Ignore,
}

/// Tags interned to ids, as sorted `(tag, count)` pairs.
#[derive(Debug, Clone, Default)]
struct TagBag {
    counts: Vec<(u32, u32)>,
    len: usize,
}

#[derive(Default)]
struct TagInterner<'a> {
    ids: HashMap<&'a str, u32>,
}

impl<'a> TagInterner<'a> {
    fn bag<S: AsRef<str>>(&mut self, tags: &'a [S]) -> TagBag {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for tag in tags {
            let next = self.ids.len() as u32;
            let id = *self.ids.entry(tag.as_ref()).or_insert(next);
            *counts.entry(id).or_default() += 1;
        }
        let mut counts: Vec<(u32, u32)> = counts.into_iter().collect();
        counts.sort_unstable();
        TagBag {
            counts,
            len: tags.len(),
        }
    }
}

fn bag_bleu(cand: &TagBag, reference: &TagBag, brevity: Brevity) -> f64 {
    if cand.len == 0 {
        return 0.0;
    }
    let (a, b) = (&cand.counts, &reference.counts);
    let (mut i, mut j) = (0, 0);
    let mut clipped = 0u32;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                clipped += a[i].1.min(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    let precision = clipped as f64 / cand.len as f64;
    let penalty = match brevity {
        Brevity::Penalize if cand.len < reference.len => {
            (1.0 - reference.len as f64 / cand.len as f64).exp()
        }
        _ => 1.0,
    };
    precision * penalty
}

/// Clipped unigram precision of `candidate` against `reference`, times the
/// brevity penalty. Tags are compared as exact strings.
pub fn bleu_unigram<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> f64 {
    bleu_unigram_with(candidate, reference, Brevity::Penalize)
}

pub fn bleu_unigram_with<S: AsRef<str>>(candidate: &[S], reference: &[S], brevity: Brevity) -> f64 {
    let mut interner = TagInterner::default();
    let cand = interner.bag(candidate);
    let reference = interner.bag(reference);
    bag_bleu(&cand, &reference, brevity)
}

/// Tag-BLEU ordering of every document's neighbors.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    ranking: SimilarityRanking,
    /// `positions[q][d]` is the 1-based rank of `d` in the row of `q`; 0 if absent.
    positions: Vec<Vec<u32>>,
    brevity: Brevity,
}

impl GroundTruth {
    /// Wraps a tag-BLEU ranking, e.g. one reloaded from TSV. `brevity` is the
    /// setting it was built with; top-n BLEU scores use the same one.
    pub fn from_ranking(ranking: SimilarityRanking, brevity: Brevity) -> Self {
        let n = ranking.len();
        let positions = ranking
            .rows()
            .par_iter()
            .map(|row| {
                let mut pos = vec![0u32; n];
                for (r, nb) in row.iter().enumerate() {
                    pos[nb.index] = r as u32 + 1;
                }
                pos
            })
            .collect();
        GroundTruth {
            ranking,
            positions,
            brevity,
        }
    }

    pub fn brevity(&self) -> Brevity {
        self.brevity
    }

    pub fn ranking(&self) -> &SimilarityRanking {
        &self.ranking
    }

    pub fn ids(&self) -> &[String] {
        self.ranking.ids()
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn row(&self, query: usize) -> &[Neighbor] {
        self.ranking.row(query)
    }

    /// 1-based position of `doc` in the truth row of `query`.
    pub fn position(&self, query: usize, doc: usize) -> Option<usize> {
        match self.positions[query][doc] {
            0 => None,
            p => Some(p as usize),
        }
    }
}

pub fn build_ground_truth(docs: &[Document], brevity: Brevity) -> Result<GroundTruth> {
    if docs.len() < 2 {
        return Err(Error::InsufficientDocuments {
            required: 2,
            available: docs.len(),
        });
    }
    let mut interner = TagInterner::default();
    let bags: Vec<TagBag> = docs.iter().map(|d| interner.bag(&d.tags)).collect();
    let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    let ranking = rank_with(&ids, None, |q, scores| {
        for (d, s) in scores.iter_mut().enumerate() {
            *s = bag_bleu(&bags[q], &bags[d], brevity);
        }
    });
    Ok(GroundTruth::from_ranking(ranking, brevity))
}

/// `|top_n(predicted) ∩ top_n(truth)| / n`.
pub fn precision_at_n(predicted: &[Neighbor], truth: &[Neighbor], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let truth_top: std::collections::HashSet<usize> =
        truth.iter().take(n).map(|nb| nb.index).collect();
    let hits = predicted
        .iter()
        .take(n)
        .filter(|nb| truth_top.contains(&nb.index))
        .count();
    hits as f64 / n as f64
}

/// Mean tag BLEU of the query against the first `n` predicted neighbors.
pub fn bleu_at_n<S: AsRef<str>>(query_tags: &[S], predicted_tags: &[&[S]], n: usize) -> f64 {
    bleu_at_n_with(query_tags, predicted_tags, n, Brevity::Penalize)
}

pub fn bleu_at_n_with<S: AsRef<str>>(
    query_tags: &[S],
    predicted_tags: &[&[S]],
    n: usize,
    brevity: Brevity,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let total: f64 = predicted_tags
        .iter()
        .take(n)
        .map(|tags| bleu_unigram_with(query_tags, tags, brevity))
        .sum();
    total / n as f64
}

/// `sum |P_i - P̂_i| / (n * dataset_size)` over the predicted top-`n`, where
/// `P̂_i = i` and `P_i` is the document's 1-based position in `truth`.
pub fn ranking_loss_at_n(
    predicted: &[Neighbor],
    truth: &[Neighbor],
    n: usize,
    dataset_size: usize,
) -> Result<f64> {
    let positions: HashMap<usize, usize> = truth
        .iter()
        .enumerate()
        .map(|(r, nb)| (nb.index, r + 1))
        .collect();
    loss_with(predicted, n, dataset_size, |d| positions.get(&d).copied())
}

fn loss_with(
    predicted: &[Neighbor],
    n: usize,
    dataset_size: usize,
    true_position: impl Fn(usize) -> Option<usize>,
) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let mut total = 0usize;
    for (r, nb) in predicted.iter().take(n).enumerate() {
        let real = true_position(nb.index).ok_or(Error::MissingFromTruth { doc: nb.index })?;
        total += real.abs_diff(r + 1);
    }
    Ok(total as f64 / (n * dataset_size) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsAtN {
    pub n: usize,
    /// Mean over queries of precision@n.
    pub precision_mean: f64,
    /// Sum over queries of the mean BLEU of the top n.
    pub bleu_sum: f64,
    /// Mean over queries of the normalized ranking loss.
    pub mae_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub dataset: usize,
    pub metrics: Vec<MetricsAtN>,
}

/// Scores `ranking` against `truth` at every cut-off in `ns`.
///
/// `tags[i]` belongs to document `i` of the ranking; both must list the same
/// documents in the same order as the ground truth.
pub fn evaluate<S: AsRef<str> + Sync>(
    method: &str,
    dataset: usize,
    ranking: &SimilarityRanking,
    truth: &GroundTruth,
    tags: &[Vec<S>],
    ns: &[usize],
) -> Result<EvalReport> {
    if ranking.ids() != truth.ids() {
        return Err(Error::CorpusMismatch(format!(
            "{method} ranks {} documents, ground truth has {}",
            ranking.len(),
            truth.len()
        )));
    }
    if tags.len() != ranking.len() {
        return Err(Error::CorpusMismatch(format!(
            "{} tag lists for {} documents",
            tags.len(),
            ranking.len()
        )));
    }
    let size = ranking.len();
    let mut metrics = Vec::with_capacity(ns.len());
    for &n in ns {
        if n == 0 || n >= size {
            return Err(Error::InvalidConfig(format!(
                "top-n {n} must lie in [1, {}]",
                size.saturating_sub(1)
            )));
        }
        let per_query: Vec<(f64, f64, f64)> = (0..size)
            .into_par_iter()
            .map(|q| {
                let row = ranking.row(q);
                if row.len() < n {
                    return Err(Error::CorpusMismatch(format!(
                        "{method} row of {:?} has {} neighbors, need {n}",
                        ranking.ids()[q],
                        row.len()
                    )));
                }
                let precision = precision_at_n(row, truth.row(q), n);
                let neighbor_tags: Vec<&[S]> =
                    row.iter().take(n).map(|nb| tags[nb.index].as_slice()).collect();
                let bleu = bleu_at_n_with(&tags[q], &neighbor_tags, n, truth.brevity());
                let loss = loss_with(row, n, size, |d| truth.position(q, d))
                    .map_err(|e| e.context(format!("query {:?}", ranking.ids()[q])))?;
                Ok((precision, bleu, loss))
            })
            .collect::<Result<_>>()?;
        let count = size as f64;
        metrics.push(MetricsAtN {
            n,
            precision_mean: per_query.iter().map(|m| m.0).sum::<f64>() / count,
            bleu_sum: per_query.iter().map(|m| m.1).sum(),
            mae_loss: per_query.iter().map(|m| m.2).sum::<f64>() / count,
        });
    }
    Ok(EvalReport {
        method: method.to_owned(),
        dataset,
        metrics,
    })
}

pub const REPORT_HEADER: &str = "method,dataset,n,precision_mean,bleu_sum,mae_loss";

/// Writes `#`-prefixed comment lines, the header, then one row per
/// (report, n).
pub fn write_report_csv<W: Write>(
    mut out: W,
    comments: &[String],
    reports: &[EvalReport],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{REPORT_HEADER}")?;
    for r in reports {
        for m in &r.metrics {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6}",
                r.method, r.dataset, m.n, m.precision_mean, m.bleu_sum, m.mae_loss
            )?;
        }
    }
    Ok(())
}
