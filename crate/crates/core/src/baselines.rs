//! Dense-vector baselines: TF-IDF weighted averages of word vectors
//! (AvgWV) and PV-DBOW document vectors, ranked by cosine.

use rayon::prelude::*;

use crate::embeddings::{DocEmbeddings, EmbeddingMatrix};
use crate::ranking::{rank_with, SimilarityRanking};
use crate::vectorize::{dense_dot, dense_norm, SparseVector, Vocabulary};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseDocVector {
    pub doc_id: String,
    pub values: Vec<f64>,
}

/// `(1/N) * sum(weight_i * vector_i)` over the document's N in-vocabulary
/// features. A document with no such feature maps to the zero vector.
pub fn avgwv_vector(
    doc_id: &str,
    doc_tfidf: &SparseVector,
    vocab: &Vocabulary,
    emb: &EmbeddingMatrix,
) -> DenseDocVector {
    let mut values = vec![0.0f64; emb.dim()];
    let mut n = 0usize;
    for &(term, weight) in doc_tfidf.entries() {
        if let Some(v) = emb.vector(vocab.term(term)) {
            for (acc, &x) in values.iter_mut().zip(v) {
                *acc += weight * x as f64;
            }
            n += 1;
        }
    }
    if n > 0 {
        let n = n as f64;
        values.iter_mut().for_each(|x| *x /= n);
    }
    DenseDocVector {
        doc_id: doc_id.to_owned(),
        values,
    }
}

pub fn avgwv_vectors(
    ids: &[String],
    tfidf: &[SparseVector],
    vocab: &Vocabulary,
    emb: &EmbeddingMatrix,
) -> Vec<DenseDocVector> {
    ids.par_iter()
        .zip(tfidf)
        .map(|(id, v)| avgwv_vector(id, v, vocab, emb))
        .collect()
}

pub fn doc2vec_vectors(emb: &DocEmbeddings) -> Vec<DenseDocVector> {
    (0..emb.len())
        .map(|i| DenseDocVector {
            doc_id: emb.ids()[i].clone(),
            values: emb.vector(i).iter().map(|&x| x as f64).collect(),
        })
        .collect()
}

/// Cosine ranking over dense vectors, with the same ordering contract as
/// [`rank_all`](crate::vectorize::rank_all).
pub fn rank_dense(vectors: &[DenseDocVector], top_n: Option<usize>) -> SimilarityRanking {
    let ids: Vec<String> = vectors.iter().map(|v| v.doc_id.clone()).collect();
    let norms: Vec<f64> = vectors.iter().map(|v| dense_norm(&v.values)).collect();
    rank_with(&ids, top_n, |q, scores| {
        for (d, s) in scores.iter_mut().enumerate() {
            let denom = norms[q] * norms[d];
            *s = if denom == 0.0 {
                0.0
            } else {
                dense_dot(&vectors[q].values, &vectors[d].values) / denom
            };
        }
    })
}
