use crate::corpus::TokenizedDocument;
use crate::error::Result;

use super::kernel::{self, Job, Objective};
use super::{EmbeddingMatrix, NoiseSampler, TrainConfig, TrainStats, TrainVocab};

/// Trains skip-gram word vectors with negative sampling.
///
/// Terms below `min_count` are removed before windows are formed. Windows
/// never cross document boundaries.
pub fn train_sgns(docs: &[TokenizedDocument], config: &TrainConfig) -> Result<EmbeddingMatrix> {
    train_sgns_with_stats(docs, config).map(|(m, _)| m)
}

pub fn train_sgns_with_stats(
    docs: &[TokenizedDocument],
    config: &TrainConfig,
) -> Result<(EmbeddingMatrix, TrainStats)> {
    config.validate()?;
    let vocab = TrainVocab::build(docs, config.min_count)?;
    let noise = NoiseSampler::new(&vocab.counts);
    let dim = config.dim;
    let mut input = kernel::init_uniform(vocab.terms.len(), dim, config.seed);
    let mut output = vec![0.0f32; vocab.terms.len() * dim];
    let job = Job {
        sequences: &vocab.sequences,
        noise: &noise,
        config,
        objective: Objective::SkipGram,
    };
    let stats = kernel::train(&job, &mut input, &mut output);
    Ok((EmbeddingMatrix::new(vocab.terms, dim, input, output), stats))
}
