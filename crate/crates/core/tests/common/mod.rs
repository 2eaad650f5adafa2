//! Brute-force reference implementations, written from the definitions
//! without reusing library code paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use docsim::corpus::{tokenize_all, Document, StopWords, TokenizedDocument};
use docsim::embeddings::{train_sgns, EmbeddingMatrix, TrainConfig};
use docsim::harness::{generate_synthetic, SyntheticSpec};

/// Small synthetic corpus with short documents.
pub fn small_corpus(docs: usize, seed: u64) -> Vec<Document> {
    generate_synthetic(&SyntheticSpec {
        num_topics: 4,
        docs,
        vocab_per_topic: 60,
        shared_vocab: 200,
        doc_length: (40, 80),
        seed,
        ..SyntheticSpec::default()
    })
    .unwrap()
}

pub fn tokens_of(docs: &[Document]) -> Vec<TokenizedDocument> {
    tokenize_all(docs, &StopWords::finnish())
}

pub fn quick_word_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 16,
        epochs: 3,
        seed,
        ..TrainConfig::word()
    }
}

pub fn quick_embeddings(tokens: &[TokenizedDocument], seed: u64) -> EmbeddingMatrix {
    train_sgns(tokens, &quick_word_config(seed)).unwrap()
}

/// Normalized TF-IDF weights per document: relative frequency times
/// `ln(N / df)`, zeros dropped, scaled to unit length.
pub fn tfidf_oracle(docs: &[TokenizedDocument]) -> Vec<BTreeMap<String, f64>> {
    let n = docs.len() as f64;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        let mut seen: Vec<&str> = d.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    docs.iter()
        .map(|d| {
            let mut counts: BTreeMap<String, f64> = BTreeMap::new();
            for t in &d.tokens {
                *counts.entry(t.clone()).or_default() += 1.0;
            }
            let len = d.tokens.len() as f64;
            let mut weights: BTreeMap<String, f64> = counts
                .into_iter()
                .map(|(t, c)| {
                    let w = c / len * (n / df[t.as_str()] as f64).ln();
                    (t, w)
                })
                .filter(|&(_, w)| w != 0.0)
                .collect();
            let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                weights.values_mut().for_each(|w| *w /= norm);
            }
            weights
        })
        .collect()
}

pub fn cosine_maps(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(t, x)| b.get(t).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn cosine_slices(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Unigram BLEU of `candidate` against one `reference`: clipped unigram
/// precision, optionally times `exp(1 - r/c)` when the candidate is shorter.
pub fn bleu_reference(candidate: &[String], reference: &[String], brevity: bool) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let mut matched = 0usize;
    let mut used = vec![false; reference.len()];
    for c in candidate {
        if let Some(i) = (0..reference.len()).find(|&i| !used[i] && reference[i] == *c) {
            used[i] = true;
            matched += 1;
        }
    }
    let p = matched as f64 / candidate.len() as f64;
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    if brevity && c < r {
        p * (1.0 - r / c).exp()
    } else {
        p
    }
}

/// Indices sorted by descending score, ties by ascending id.
pub fn sort_by_score(ids: &[String], scored: &mut [(usize, f64)]) {
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| ids[a.0].cmp(&ids[b.0])));
}

/// Full ground-truth ordering of every document by tag BLEU.
pub fn truth_oracle(ids: &[String], tags: &[Vec<String>], brevity: bool) -> Vec<Vec<usize>> {
    (0..ids.len())
        .map(|q| {
            let mut scored: Vec<(usize, f64)> = (0..ids.len())
                .filter(|&d| d != q)
                .map(|d| (d, bleu_reference(&tags[q], &tags[d], brevity)))
                .collect();
            sort_by_score(ids, &mut scored);
            scored.into_iter().map(|(d, _)| d).collect()
        })
        .collect()
}

pub fn precision_oracle(predicted: &[usize], truth: &[usize], n: usize) -> f64 {
    let hits = predicted[..n].iter().filter(|d| truth[..n].contains(d)).count();
    hits as f64 / n as f64
}

pub fn loss_oracle(predicted: &[usize], truth: &[usize], n: usize, size: usize) -> f64 {
    let mut total = 0.0;
    for (i, d) in predicted[..n].iter().enumerate() {
        let real = truth.iter().position(|t| t == d).unwrap() + 1;
        total += (real as f64 - (i + 1) as f64).abs();
    }
    total / (n * size) as f64
}

/// TFW2V by direct evaluation of every pair.
pub fn tfw2v_oracle(
    docs: &[TokenizedDocument],
    emb: &EmbeddingMatrix,
    min_weight: f64,
    max_term: usize,
    alpha: f64,
) -> Vec<Vec<(usize, f64)>> {
    let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    let weights = tfidf_oracle(docs);

    // Term ids follow first occurrence in document order.
    let mut first_seen: HashMap<&str, usize> = HashMap::new();
    for t in docs.iter().flat_map(|d| &d.tokens) {
        let next = first_seen.len();
        first_seen.entry(t).or_insert(next);
    }
    let features: Vec<Vec<&str>> = weights
        .iter()
        .map(|w| {
            let mut f: Vec<(&str, f64)> = w
                .iter()
                .filter(|&(_, &x)| x >= min_weight)
                .map(|(t, &x)| (t.as_str(), x))
                .collect();
            f.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(first_seen[a.0].cmp(&first_seen[b.0])));
            f.truncate(max_term);
            f.into_iter().map(|(t, _)| t).collect()
        })
        .collect();
    let mean = |terms: &[&str]| -> Option<Vec<f64>> {
        let found: Vec<&[f32]> = terms.iter().filter_map(|t| emb.vector(t)).collect();
        if found.is_empty() {
            return None;
        }
        Some(
            (0..emb.dim())
                .map(|k| found.iter().map(|v| v[k] as f64).sum::<f64>() / found.len() as f64)
                .collect(),
        )
    };
    let means: Vec<Option<Vec<f64>>> = features.iter().map(|f| mean(f)).collect();

    (0..docs.len())
        .map(|q| {
            let mut row: Vec<(usize, f64)> = (0..docs.len())
                .filter(|&d| d != q)
                .map(|d| {
                    let sim = cosine_maps(&weights[q], &weights[d]);
                    let score = match (&means[q], &means[d]) {
                        (Some(a), Some(b)) => (cosine_slices(a, b) * alpha + sim) / (1.0 + alpha),
                        _ => sim,
                    };
                    (d, score)
                })
                .collect();
            sort_by_score(&ids, &mut row);
            row
        })
        .collect()
}
