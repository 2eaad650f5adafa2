//! Document ingestion, tokenization, length filtering and dataset sampling.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FINNISH_STOPWORDS: &str = include_str!("../assets/stopwords_fi.txt");

/// A raw article with its human-assigned keyword tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDocument {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Length filter and sampling parameters for building evaluation datasets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub min_words: usize,
    pub max_words: usize,
    pub dataset_size: usize,
    pub num_datasets: usize,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            min_words: 200,
            max_words: 600,
            dataset_size: 2000,
            num_datasets: 10,
            seed: 0,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.min_words == 0 || self.min_words > self.max_words {
            return Err(Error::InvalidConfig(format!(
                "need 0 < min_words <= max_words, got min_words = {}, max_words = {}",
                self.min_words, self.max_words
            )));
        }
        if self.dataset_size == 0 || self.num_datasets == 0 {
            return Err(Error::InvalidConfig(
                "dataset_size and num_datasets must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Set of lowercase words dropped during tokenization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    pub fn empty() -> Self {
        StopWords::default()
    }

    /// The bundled Finnish list.
    pub fn finnish() -> Self {
        StopWords::parse(FINNISH_STOPWORDS)
    }

    /// Parses one word per line; blank lines and `#` comments are skipped.
    pub fn parse(contents: &str) -> Self {
        let words = contents
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopWords { words }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopWords::parse(&contents))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords {
            words: iter.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }
}

/// Reads a JSONL corpus, one `{"id", "text", "tags"}` object per line.
///
/// Blank lines are skipped. Any other line that fails to parse is an error
/// carrying its 1-based line number, as is a repeated id.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if doc.id.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: "empty document id".into(),
            });
        }
        if seen.insert(doc.id.clone(), line_no).is_some() {
            return Err(Error::DuplicateId {
                id: doc.id,
                line: line_no,
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in docs {
        let line = serde_json::to_string(doc).expect("documents always serialize");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Lowercases `text` and splits it into maximal runs of alphanumeric
/// characters, dropping stopwords.
///
/// Everything that is not alphanumeric acts as a separator, so punctuation
/// disappears and hyphenated compounds become separate tokens.
pub fn tokenize(text: &str, stopwords: &StopWords) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(t))
        .map(str::to_owned)
        .collect()
}

pub fn tokenize_document(doc: &Document, stopwords: &StopWords) -> TokenizedDocument {
    TokenizedDocument {
        id: doc.id.clone(),
        tokens: tokenize(&doc.text, stopwords),
    }
}

pub fn tokenize_all(docs: &[Document], stopwords: &StopWords) -> Vec<TokenizedDocument> {
    use rayon::prelude::*;
    docs.par_iter()
        .map(|d| tokenize_document(d, stopwords))
        .collect()
}

/// Whitespace-delimited word count of the raw text.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

pub fn filter_by_length(docs: &[Document], spec: &DatasetSpec) -> Vec<Document> {
    docs.iter()
        .filter(|d| (spec.min_words..=spec.max_words).contains(&word_count(&d.text)))
        .cloned()
        .collect()
}

/// Draws `num_datasets` disjoint datasets of `dataset_size` documents each.
///
/// Only documents with at least one tag are eligible, since untagged
/// documents have no ground truth. The draw is a seeded shuffle of the
/// eligible documents in input order.
pub fn sample_datasets(docs: &[Document], spec: &DatasetSpec) -> Result<Vec<Vec<Document>>> {
    spec.validate()?;
    let mut pool: Vec<&Document> = docs.iter().filter(|d| !d.tags.is_empty()).collect();
    let required = spec.dataset_size * spec.num_datasets;
    if pool.len() < required {
        return Err(Error::InsufficientDocuments {
            required,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    pool.shuffle(&mut rng);
    Ok(pool[..required]
        .chunks(spec.dataset_size)
        .map(|chunk| chunk.iter().map(|&d| d.clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, words: usize) -> Document {
        Document {
            id: id.into(),
            text: vec!["sana"; words].join(" "),
            tags: vec!["t".into()],
        }
    }

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn loads_documents_in_order() {
        let f = write_lines(&[
            r#"{"id": "a", "text": "yksi", "tags": ["x"]}"#,
            r#"{"id": "b", "text": "kaksi", "tags": []}"#,
            r#"{"id": "c", "text": "kolme", "tags": ["x", "y"]}"#,
        ]);
        let docs = load_corpus(f.path()).unwrap();
        let ids: Vec<_> = docs.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(docs[2].tags, ["x", "y"]);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let f = write_lines(&[]);
        assert!(load_corpus(f.path()).unwrap().is_empty());
    }

    #[test]
    fn missing_key_names_the_line() {
        let f = write_lines(&[
            r#"{"id": "a", "text": "yksi", "tags": []}"#,
            r#"{"id": "b", "tags": []}"#,
        ]);
        match load_corpus(f.path()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("text"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let f = write_lines(&[
            r#"{"id": "a", "text": "", "tags": []}"#,
            r#"{"id": "a", "text": "", "tags": []}"#,
        ]);
        assert!(matches!(
            load_corpus(f.path()),
            Err(Error::DuplicateId { line: 2, .. })
        ));
    }

    #[test]
    fn tokenize_strips_punctuation_and_case() {
        assert_eq!(
            tokenize("Kissa istui matolla.", &StopWords::empty()),
            ["kissa", "istui", "matolla"]
        );
    }

    #[test]
    fn tokenize_drops_stopwords() {
        let sw: StopWords = ["ja"].into_iter().collect();
        assert!(tokenize("ja ja ja", &sw).is_empty());
        assert!(tokenize("", &sw).is_empty());
    }

    #[test]
    fn tokenize_splits_hyphenated_compounds() {
        assert_eq!(
            tokenize("EU-maiden «Yle-uutiset»", &StopWords::empty()),
            ["eu", "maiden", "yle", "uutiset"]
        );
    }

    #[test]
    fn finnish_list_is_bundled() {
        let sw = StopWords::finnish();
        assert!(sw.contains("ja"));
        assert!(sw.contains("että"));
        assert!(!sw.contains("# finnish stopwords, one per line. lines starting with '#' are ignored."));
        assert_eq!(tokenize("Kissa ja koira", &sw), ["kissa", "koira"]);
    }

    #[test]
    fn length_filter_boundaries() {
        let spec = DatasetSpec::default();
        let docs = [doc("a", 199), doc("b", 200), doc("c", 600), doc("d", 601)];
        let kept: Vec<_> = filter_by_length(&docs, &spec)
            .into_iter()
            .map(|d| d.id)
            .collect();
        assert_eq!(kept, ["b", "c"]);
    }

    #[test]
    fn length_filter_counts_raw_words() {
        let spec = DatasetSpec {
            min_words: 3,
            max_words: 4,
            ..DatasetSpec::default()
        };
        let mk = |id: &str, text: &str| Document {
            id: id.into(),
            text: text.into(),
            tags: vec![],
        };
        let docs = [
            mk("a", "yksi kaksi"),
            mk("b", "ja ja ja"),
            mk("c", "yksi,  kaksi\tkolme\nneljä"),
            mk("d", "a b c d e"),
            mk("e", ""),
        ];
        let kept: Vec<_> = filter_by_length(&docs, &spec)
            .into_iter()
            .map(|d| d.id)
            .collect();
        assert_eq!(kept, ["b", "c"]);
    }

    #[test]
    fn sampling_is_disjoint_and_deterministic() {
        let docs: Vec<_> = (0..20_000).map(|i| doc(&format!("d{i}"), 1)).collect();
        let spec = DatasetSpec {
            seed: 7,
            ..DatasetSpec::default()
        };
        let sets = sample_datasets(&docs, &spec).unwrap();
        assert_eq!(sets.len(), 10);
        assert!(sets.iter().all(|s| s.len() == 2000));
        let ids: HashSet<_> = sets.iter().flatten().map(|d| d.id.as_str()).collect();
        assert_eq!(ids.len(), 20_000);
        assert_eq!(sets, sample_datasets(&docs, &spec).unwrap());
    }

    #[test]
    fn sampling_reports_shortfall() {
        let docs: Vec<_> = (0..100).map(|i| doc(&format!("d{i}"), 1)).collect();
        match sample_datasets(&docs, &DatasetSpec::default()) {
            Err(Error::InsufficientDocuments {
                required,
                available,
            }) => assert_eq!((required, available), (20_000, 100)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn untagged_documents_are_not_sampled() {
        let mut docs: Vec<_> = (0..4).map(|i| doc(&format!("d{i}"), 1)).collect();
        docs[1].tags.clear();
        let spec = DatasetSpec {
            dataset_size: 3,
            num_datasets: 1,
            ..DatasetSpec::default()
        };
        let sets = sample_datasets(&docs, &spec).unwrap();
        assert!(sets[0].iter().all(|d| d.id != "d1"));
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,80}") {
            let sw = StopWords::finnish();
            let once = tokenize(&text, &sw);
            let twice = tokenize(&once.join(" "), &sw);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn length_filter_is_idempotent(lens in proptest::collection::vec(0usize..12, 0..20)) {
            let spec = DatasetSpec { min_words: 3, max_words: 8, ..DatasetSpec::default() };
            let docs: Vec<_> = lens.iter().enumerate().map(|(i, &n)| doc(&i.to_string(), n)).collect();
            let once = filter_by_length(&docs, &spec);
            prop_assert_eq!(filter_by_length(&once, &spec), once);
        }

        #[test]
        fn sampled_ids_are_distinct(n in 6usize..60, size in 1usize..4, k in 1usize..3, seed: u64) {
            let docs: Vec<_> = (0..n).map(|i| doc(&format!("d{i}"), 1)).collect();
            let spec = DatasetSpec { dataset_size: size, num_datasets: k, seed, ..DatasetSpec::default() };
            let sets = sample_datasets(&docs, &spec).unwrap();
            let ids: HashSet<_> = sets.iter().flatten().map(|d| d.id.clone()).collect();
            prop_assert_eq!(ids.len(), size * k);
        }
    }
}
