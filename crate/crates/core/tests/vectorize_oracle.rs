mod common;

use common::*;
use docsim::baselines::{rank_dense, DenseDocVector};
use docsim::vectorize::{build_vocabulary, cosine_dense, cosine_sparse, rank_all, tfidf_vectors, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sparse(rng: &mut ChaCha8Rng, dim: u32) -> SparseVector {
    let mut entries = Vec::new();
    for t in 0..dim {
        if rng.random_bool(0.2) {
            entries.push((t, rng.random_range(0.0..3.0)));
        }
    }
    SparseVector::from_entries(entries)
}

#[test]
fn sparse_cosine_matches_dense_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let (a, b) = (random_sparse(&mut rng, 60), random_sparse(&mut rng, 60));
        let (da, db) = (a.to_dense(60), b.to_dense(60));
        assert!((cosine_sparse(&a, &b) - cosine_slices(&da, &db)).abs() <= 1e-9);
    }
}

#[test]
fn tfidf_weights_match_definition_on_synthetic_docs() {
    let docs = tokens_of(&small_corpus(80, 4));
    let vocab = build_vocabulary(&docs).unwrap();
    let vectors = tfidf_vectors(&docs, &vocab);
    let oracle = tfidf_oracle(&docs);
    for (v, o) in vectors.iter().zip(&oracle) {
        assert_eq!(v.len(), o.len());
        for &(t, w) in v.entries() {
            assert!((w - o[vocab.term(t)]).abs() <= 1e-12);
            assert!((0.0..=1.0).contains(&w));
        }
    }
}

#[test]
fn tfidf_ranking_matches_brute_force() {
    let docs = tokens_of(&small_corpus(50, 6));
    let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    let vocab = build_vocabulary(&docs).unwrap();
    let ranking = rank_all(&ids, &tfidf_vectors(&docs, &vocab), None);
    let oracle = tfidf_oracle(&docs);
    for q in 0..docs.len() {
        let mut expected: Vec<(usize, f64)> = (0..docs.len())
            .filter(|&d| d != q)
            .map(|d| (d, cosine_maps(&oracle[q], &oracle[d])))
            .collect();
        sort_by_score(&ids, &mut expected);
        for (nb, &(_, score)) in ranking.row(q).iter().zip(&expected) {
            assert!((nb.score - score).abs() <= 1e-12);
        }
    }
}

#[test]
fn dense_ranking_matches_pairwise_cosine() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vectors: Vec<DenseDocVector> = (0..50)
        .map(|i| DenseDocVector {
            doc_id: format!("v{i:02}"),
            values: (0..8).map(|_| rng.random_range(-1.0..1.0)).collect(),
        })
        .collect();
    let ids: Vec<String> = vectors.iter().map(|v| v.doc_id.clone()).collect();
    let ranking = rank_dense(&vectors, None);
    for q in 0..vectors.len() {
        let mut expected: Vec<(usize, f64)> = (0..vectors.len())
            .filter(|&d| d != q)
            .map(|d| (d, cosine_dense(&vectors[q].values, &vectors[d].values)))
            .collect();
        sort_by_score(&ids, &mut expected);
        let got: Vec<usize> = ranking.row(q).iter().map(|n| n.index).collect();
        let want: Vec<usize> = expected.iter().map(|e| e.0).collect();
        assert_eq!(got, want, "query {q}");
    }
}
