//! Per-document neighbor rankings and their TSV persistence.
//!
//! Every similarity method, and the tag-based ground truth, produces a
//! [`SimilarityRanking`]: for each query document, the other documents in
//! descending score order. Ties are broken by ascending document id so the
//! output never depends on thread scheduling.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Position of the neighbor in [`SimilarityRanking::ids`].
    pub index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRanking {
    ids: Vec<String>,
    rows: Vec<Vec<Neighbor>>,
}

impl SimilarityRanking {
    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<Neighbor>>) -> Self {
        assert_eq!(ids.len(), rows.len(), "one row per document");
        SimilarityRanking { ids, rows }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<Neighbor>] {
        &self.rows
    }

    pub fn row(&self, query: usize) -> &[Neighbor] {
        &self.rows[query]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn into_rows(self) -> (Vec<String>, Vec<Vec<Neighbor>>) {
        (self.ids, self.rows)
    }

    pub fn truncated(mut self, top_n: Option<usize>) -> Self {
        if let Some(n) = top_n {
            for row in &mut self.rows {
                row.truncate(n);
            }
        }
        self
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (q, row) in self.rows.iter().enumerate() {
            for (rank, nb) in row.iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{:.6}",
                    self.ids[q],
                    rank + 1,
                    self.ids[nb.index],
                    nb.score
                )?;
            }
        }
        Ok(())
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_tsv(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads rows written by [`save_tsv`](Self::save_tsv).
    ///
    /// Document order is the order in which query ids first appear; a
    /// document that only occurs as a neighbor is appended after them.
    /// `#` comment lines are skipped.
    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };

        let mut records: Vec<(usize, String, usize, String, f64)> = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [query, rank, neighbor, score] = fields[..] else {
                return Err(parse_err(line_no, format!("expected 4 fields, got {}", fields.len())));
            };
            let rank: usize = rank
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad rank {rank:?}")))?;
            let score: f64 = score
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad score {score:?}")))?;
            records.push((line_no, query.to_owned(), rank, neighbor.to_owned(), score));
        }

        let mut index: HashMap<String, usize> = HashMap::new();
        let mut ids: Vec<String> = Vec::new();
        let queries = records.iter().map(|r| &r.1);
        let neighbors = records.iter().map(|r| &r.3);
        for id in queries.chain(neighbors) {
            if !index.contains_key(id) {
                index.insert(id.clone(), ids.len());
                ids.push(id.clone());
            }
        }
        let mut rows: Vec<Vec<Neighbor>> = vec![Vec::new(); ids.len()];
        for (line_no, query, rank, neighbor, score) in records {
            let q = index[&query];
            if rank != rows[q].len() + 1 {
                return Err(parse_err(
                    line_no,
                    format!("rank {rank} out of sequence for query {query:?}"),
                ));
            }
            rows[q].push(Neighbor {
                index: index[&neighbor],
                score,
            });
        }
        Ok(SimilarityRanking { ids, rows })
    }
}

/// Descending by score, then ascending by `id_order`.
pub(crate) fn compare_neighbors(a: &Neighbor, b: &Neighbor, id_order: &[usize]) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| id_order[a.index].cmp(&id_order[b.index]))
}

/// Position of each document when ids are sorted ascending.
pub(crate) fn id_order(ids: &[String]) -> Vec<usize> {
    let mut by_id: Vec<usize> = (0..ids.len()).collect();
    by_id.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    let mut order = vec![0; ids.len()];
    for (pos, &doc) in by_id.iter().enumerate() {
        order[doc] = pos;
    }
    order
}

pub(crate) fn sort_row(row: &mut [Neighbor], id_order: &[usize]) {
    row.sort_by(|a, b| compare_neighbors(a, b, id_order));
}

/// Builds a ranking from a scoring callback.
///
/// `score_row(q, scores)` fills `scores[d]` with the similarity of query `q`
/// to every document `d`; the entry at `q` itself is ignored. Rows are
/// computed in parallel and each is independent of the others.
pub(crate) fn rank_with<F>(ids: &[String], top_n: Option<usize>, score_row: F) -> SimilarityRanking
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let n = ids.len();
    let order = id_order(ids);
    let rows = (0..n)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |scores, q| {
                scores.iter_mut().for_each(|s| *s = 0.0);
                score_row(q, scores);
                let mut row: Vec<Neighbor> = (0..n)
                    .filter(|&d| d != q)
                    .map(|d| Neighbor {
                        index: d,
                        score: scores[d],
                    })
                    .collect();
                sort_row(&mut row, &order);
                if let Some(k) = top_n {
                    row.truncate(k);
                }
                row
            },
        )
        .collect();
    SimilarityRanking {
        ids: ids.to_vec(),
        rows,
    }
}
