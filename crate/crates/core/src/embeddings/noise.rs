use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

/// Draws negative samples from the unigram distribution raised to 3/4.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    alias: WeightedAliasIndex<f64>,
    probs: Vec<f64>,
}

impl NoiseSampler {
    pub const POWER: f64 = 0.75;

    /// `counts` must be non-empty with at least one positive entry.
    pub fn new(counts: &[u64]) -> Self {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(Self::POWER)).collect();
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights).expect("noise counts must be positive");
        NoiseSampler { alias, probs }
    }

    /// Target probability of each index.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }
}
