use crate::corpus::TokenizedDocument;
use crate::error::Result;

use super::kernel::{self, Job, Objective};
use super::{DocEmbeddings, NoiseSampler, TrainConfig, TrainStats, TrainVocab};

/// Trains one vector per document with the distributed bag-of-words
/// objective: each document vector predicts the words it contains against
/// negative samples. `window` is unused.
pub fn train_pvdbow(docs: &[TokenizedDocument], config: &TrainConfig) -> Result<DocEmbeddings> {
    train_pvdbow_with_stats(docs, config).map(|(d, _)| d)
}

pub fn train_pvdbow_with_stats(
    docs: &[TokenizedDocument],
    config: &TrainConfig,
) -> Result<(DocEmbeddings, TrainStats)> {
    config.validate()?;
    let vocab = TrainVocab::build(docs, config.min_count)?;
    let noise = NoiseSampler::new(&vocab.counts);
    let dim = config.dim;
    let mut doc_vectors = kernel::init_uniform(docs.len(), dim, config.seed);
    let mut output = vec![0.0f32; vocab.terms.len() * dim];
    let job = Job {
        sequences: &vocab.sequences,
        noise: &noise,
        config,
        objective: Objective::DistributedBagOfWords,
    };
    let stats = kernel::train(&job, &mut doc_vectors, &mut output);
    let ids = docs.iter().map(|d| d.id.clone()).collect();
    Ok((DocEmbeddings::new(ids, dim, doc_vectors), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::cosine_dense;
    use rand::seq::{IndexedRandom, SliceRandom};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn to64(v: &[f32]) -> Vec<f64> {
        v.iter().map(|&x| x as f64).collect()
    }

    /// Documents 0 and 1 are permutations of each other; the rest are
    /// random draws from a shared word pool.
    fn corpus(seed: u64) -> Vec<TokenizedDocument> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<String> = (0..200).map(|i| format!("w{i}")).collect();
        let mut docs: Vec<TokenizedDocument> = (0..30)
            .map(|i| TokenizedDocument {
                id: format!("d{i:02}"),
                tokens: (0..60).map(|_| pool.choose(&mut rng).unwrap().clone()).collect(),
            })
            .collect();
        let mut twin = docs[0].tokens.clone();
        twin.shuffle(&mut rng);
        docs[1].tokens = twin;
        docs
    }

    fn config(seed: u64) -> TrainConfig {
        TrainConfig {
            dim: 32,
            epochs: 30,
            seed,
            ..TrainConfig::doc()
        }
    }

    #[test]
    fn identical_bags_are_closer_than_random_pairs() {
        let wins = (0..10)
            .filter(|&seed| {
                let docs = corpus(seed);
                let emb = train_pvdbow(&docs, &config(seed)).unwrap();
                let twin = cosine_dense(&to64(emb.vector(0)), &to64(emb.vector(1)));
                let mut total = 0.0;
                let mut pairs = 0;
                for a in 2..docs.len() {
                    for b in (a + 1)..docs.len() {
                        total += cosine_dense(&to64(emb.vector(a)), &to64(emb.vector(b)));
                        pairs += 1;
                    }
                }
                twin > total / pairs as f64
            })
            .count();
        assert!(wins >= 9, "only {wins}/10 seeds");
    }

    #[test]
    fn single_document_corpus() {
        let docs = [TokenizedDocument {
            id: "only".into(),
            tokens: ["a", "b", "a", "b", "c", "c"].iter().map(|s| s.to_string()).collect(),
        }];
        let emb = train_pvdbow(&docs, &config(0)).unwrap();
        assert_eq!(emb.len(), 1);
        assert!(emb.is_finite());
    }

    #[test]
    fn deterministic_mode_is_bit_reproducible() {
        let docs = corpus(4);
        assert_eq!(
            train_pvdbow(&docs, &config(9)).unwrap(),
            train_pvdbow(&docs, &config(9)).unwrap()
        );
    }
}
