//! Seeded generator of tagged topical documents.
//!
//! Each topic owns a private word pool and all topics share a common pool.
//! A document picks one topic, draws `topic_mix` of its tokens from that
//! topic's pool and the rest from the shared pool, both Zipf-distributed.
//! Its tags are the topic label plus a few of its most frequent topic words,
//! so tag overlap tracks lexical overlap.

use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::{Document, StopWords};
use crate::error::{Error, Result};

/// Number of top topic words a document's tags are sampled from.
const TAG_POOL: usize = 8;
const ZIPF_EXPONENT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_topics: usize,
    pub docs: usize,
    pub vocab_per_topic: usize,
    pub shared_vocab: usize,
    /// Inclusive word-count range of each document.
    pub doc_length: (usize, usize),
    /// Fraction of tokens drawn from the document's topic pool.
    pub topic_mix: f64,
    /// Inclusive range of tags per document, label included.
    pub tags_per_doc: (usize, usize),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_topics: 10,
            docs: 2000,
            vocab_per_topic: 300,
            shared_vocab: 2000,
            doc_length: (200, 600),
            topic_mix: 0.6,
            tags_per_doc: (3, 6),
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_topics", self.num_topics),
            ("docs", self.docs),
            ("vocab_per_topic", self.vocab_per_topic),
            ("shared_vocab", self.shared_vocab),
            ("doc_length minimum", self.doc_length.0),
            ("tags_per_doc minimum", self.tags_per_doc.0),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if self.doc_length.0 > self.doc_length.1 || self.tags_per_doc.0 > self.tags_per_doc.1 {
            return Err(Error::InvalidConfig("empty length or tag range".into()));
        }
        if !(self.topic_mix > 0.0 && self.topic_mix <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "topic_mix must lie in (0, 1], got {}",
                self.topic_mix
            )));
        }
        Ok(())
    }
}

pub fn topic_label(topic: usize) -> String {
    format!("aihe{topic:02}")
}

/// Generates `spec.docs` documents with ids `doc00000`, `doc00001`, ...
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<Document>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut words = WordMaker::default();
    let shared: Vec<String> = (0..spec.shared_vocab).map(|_| words.make(&mut rng)).collect();
    let topics: Vec<Vec<String>> = (0..spec.num_topics)
        .map(|_| (0..spec.vocab_per_topic).map(|_| words.make(&mut rng)).collect())
        .collect();
    let shared_zipf = Zipf::new(spec.shared_vocab as f64, ZIPF_EXPONENT).expect("valid zipf");
    let topic_zipf = Zipf::new(spec.vocab_per_topic as f64, ZIPF_EXPONENT).expect("valid zipf");
    let width = spec.docs.saturating_sub(1).to_string().len().max(5);

    let docs = (0..spec.docs)
        .map(|i| {
            let topic = rng.random_range(0..spec.num_topics);
            let len = rng.random_range(spec.doc_length.0..=spec.doc_length.1);
            let mut tokens: Vec<&str> = Vec::with_capacity(len);
            let mut topic_counts: HashMap<usize, usize> = HashMap::new();
            for _ in 0..len {
                if rng.random_bool(spec.topic_mix) {
                    let w = topic_zipf.sample(&mut rng) as usize - 1;
                    *topic_counts.entry(w).or_default() += 1;
                    tokens.push(&topics[topic][w]);
                } else {
                    tokens.push(&shared[shared_zipf.sample(&mut rng) as usize - 1]);
                }
            }

            let mut ranked: Vec<(usize, usize)> = topic_counts.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            ranked.truncate(TAG_POOL);
            let wanted = rng.random_range(spec.tags_per_doc.0..=spec.tags_per_doc.1) - 1;
            let mut picks = index::sample(&mut rng, ranked.len(), wanted.min(ranked.len())).into_vec();
            picks.sort_unstable();
            let mut tags = vec![topic_label(topic)];
            tags.extend(picks.iter().map(|&p| topics[topic][ranked[p].0].clone()));

            Document {
                id: format!("doc{i:0width$}"),
                text: to_sentences(&tokens, &mut rng),
                tags,
            }
        })
        .collect();
    Ok(docs)
}

/// Joins words into capitalized, period-terminated sentences of 6 to 14
/// words. The whitespace word count equals `tokens.len()`.
fn to_sentences(tokens: &[&str], rng: &mut impl Rng) -> String {
    let mut text = String::with_capacity(tokens.len() * 8);
    let mut left = 0;
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            text.push(' ');
        }
        if left == 0 {
            left = rng.random_range(6..=14);
            let mut chars = tok.chars();
            if let Some(first) = chars.next() {
                text.extend(first.to_uppercase());
                text.push_str(chars.as_str());
            }
        } else {
            text.push_str(tok);
        }
        left -= 1;
        if left == 0 || i + 1 == tokens.len() {
            text.push('.');
        }
    }
    text
}

/// Unique pseudo-Finnish words built from consonant-vowel syllables.
#[derive(Default)]
struct WordMaker {
    used: HashSet<String>,
    stopwords: Option<StopWords>,
}

impl WordMaker {
    const CONSONANTS: [char; 12] = ['h', 'j', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'd'];
    const VOWELS: [char; 8] = ['a', 'e', 'i', 'o', 'u', 'y', 'ä', 'ö'];

    fn make(&mut self, rng: &mut impl Rng) -> String {
        let stopwords = self.stopwords.get_or_insert_with(StopWords::finnish);
        loop {
            let syllables = rng.random_range(2..=4);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push(Self::CONSONANTS[rng.random_range(0..Self::CONSONANTS.len())]);
                w.push(Self::VOWELS[rng.random_range(0..Self::VOWELS.len())]);
            }
            if rng.random_bool(0.3) {
                w.push(Self::CONSONANTS[rng.random_range(0..Self::CONSONANTS.len())]);
            }
            if !stopwords.contains(&w) && self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}
