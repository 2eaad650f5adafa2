//! Document similarity with TF-IDF, word and document embeddings, and
//! TF-IDF rankings re-scored by embedding similarity of each document's
//! strongest terms (TFW2V). Includes a tag-based evaluation framework and a
//! synthetic tagged-corpus generator.

pub mod baselines;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod harness;
pub mod ranking;
pub mod tfw2v;
pub mod vectorize;

pub use error::{Error, Result};
pub use ranking::{Neighbor, SimilarityRanking};
