use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "\
docs = 240
doc_length = 40,80
min_words = 40
max_words = 80
dataset_size = 100
num_datasets = 2
word_dim = 16
word_epochs = 2
doc_dim = 12
doc_epochs = 2
top_n = 5,10
";

fn docsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_docsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to run docsim")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = docsim(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1, "summary should be one line: {stdout}");
    stdout
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.conf"), SMALL).unwrap();
    dir
}

fn pipeline(dir: &Path, extra: &[&str]) {
    for cmd in ["generate", "sample", "train", "rank", "evaluate"] {
        let mut args = vec![cmd, "--config", "small.conf"];
        args.extend_from_slice(extra);
        ok(dir, &args);
    }
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let ws = workspace();
    pipeline(ws.path(), &["--deterministic"]);
    let out = ws.path().join("out");
    for name in ["corpus.jsonl", "dataset_1.jsonl", "dataset_2.jsonl"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    for name in [
        "vocab.tsv",
        "word_vectors.txt",
        "doc_vectors.txt",
        "rankings_tfidf.tsv",
        "rankings_avgwv.tsv",
        "rankings_d2v.tsv",
        "rankings_tfw2v.tsv",
        "rankings_tfw2v.tsv.params",
        "report.csv",
    ] {
        assert!(out.join("dataset_1").join(name).is_file(), "{name}");
    }
    let report = fs::read_to_string(out.join("dataset_1/report.csv")).unwrap();
    assert!(report.contains("# alpha = 0.1"));
    let rows: Vec<&str> = report.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "method,dataset,n,precision_mean,bleu_sum,mae_loss");
    assert_eq!(rows.len(), 1 + 4 * 2);
}

#[test]
fn ranking_scores_never_increase_down_a_row() {
    let ws = workspace();
    pipeline(ws.path(), &["--deterministic", "--method", "tfidf", "--method", "tfw2v"]);
    for method in ["tfidf", "tfw2v"] {
        let text = fs::read_to_string(ws.path().join(format!("out/dataset_1/rankings_{method}.tsv"))).unwrap();
        let mut prev: Option<(String, f64)> = None;
        for line in text.lines() {
            let f: Vec<&str> = line.split('\t').collect();
            let score: f64 = f[3].parse().unwrap();
            if let Some((q, s)) = &prev {
                if q == f[0] {
                    assert!(score <= *s, "{line}");
                }
            }
            prev = Some((f[0].to_owned(), score));
        }
    }
}

#[test]
fn alpha_zero_ranking_is_byte_identical_to_tfidf() {
    let ws = workspace();
    let dir = ws.path();
    for cmd in ["generate", "sample", "train"] {
        ok(dir, &[cmd, "--config", "small.conf", "--method", "tfw2v", "--deterministic"]);
    }
    ok(dir, &["rank", "--config", "small.conf", "--method", "tfw2v", "--alpha", "0"]);
    ok(dir, &["rank", "--config", "small.conf", "--method", "tfidf"]);
    let a = fs::read(dir.join("out/dataset_1/rankings_tfw2v.tsv")).unwrap();
    let b = fs::read(dir.join("out/dataset_1/rankings_tfidf.tsv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let (first, second) = (workspace(), workspace());
    pipeline(first.path(), &["--deterministic", "--seed", "5"]);
    pipeline(second.path(), &["--deterministic", "--seed", "5"]);
    let (fa, fb) = (files(first.path()), files(second.path()));
    assert_eq!(fa.len(), fb.len());
    for (a, b) in fa.iter().zip(&fb) {
        assert_eq!(a.strip_prefix(first.path()), b.strip_prefix(second.path()));
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{}", a.display());
    }
}

#[test]
fn missing_artifact_exits_2_and_names_the_file() {
    let ws = workspace();
    let out = docsim(ws.path(), &["rank", "--config", "small.conf"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("dataset_1.jsonl"), "{err}");

    ok(ws.path(), &["generate", "--config", "small.conf"]);
    ok(ws.path(), &["sample", "--config", "small.conf"]);
    let out = docsim(ws.path(), &["rank", "--config", "small.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vocab.tsv"));

    let out = docsim(ws.path(), &["benchmark", "--corpus", "nowhere.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.jsonl"));
}

#[test]
fn unknown_subcommand_exits_1_with_usage() {
    let ws = workspace();
    let out = docsim(ws.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_config_exits_1() {
    let ws = workspace();
    fs::write(ws.path().join("bad.conf"), "colour = blue\n").unwrap();
    for args in [
        &["generate", "--config", "bad.conf"][..],
        &["generate", "--config", "missing.conf"],
        &["rank", "--config", "small.conf", "--alpha", "-1"],
        &["rank", "--config", "small.conf", "--top-n", "0"],
        &["rank", "--config", "small.conf", "--method", "lsa"],
    ] {
        let out = docsim(ws.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let ws = workspace();
    ok(ws.path(), &["generate", "--config", "small.conf", "--seed", "9", "--out", "elsewhere"]);
    let params = fs::read_to_string(ws.path().join("elsewhere/corpus.jsonl.params")).unwrap();
    assert!(params.contains("seed = 9"));
    assert!(params.contains("docs = 240"));
    assert!(params.contains("output_dir = elsewhere"));
}

#[test]
fn help_exits_0() {
    let ws = workspace();
    let out = docsim(ws.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["generate", "sample", "train", "rank", "evaluate", "benchmark"] {
        assert!(text.contains(cmd));
    }
}

#[test]
fn benchmark_report_row_count_follows_config() {
    let ws = workspace();
    ok(ws.path(), &["generate", "--config", "small.conf"]);
    let summary = ok(ws.path(), &["benchmark", "--config", "small.conf", "--deterministic"]);
    assert!(summary.contains("4 methods x 2 datasets"), "{summary}");
    let report = fs::read_to_string(ws.path().join("out/report.csv")).unwrap();
    let rows = report.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 4 * 2 * 2);
}
