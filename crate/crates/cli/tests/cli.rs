use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use reda_core::record::read_tsv;
use tempfile::TempDir;

fn reda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reda")).args(args).output().expect("spawn reda")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn train(dir: &TempDir, corpus: &str) -> (Output, std::path::PathBuf) {
    let corpus_path = dir.path().join("corpus.txt");
    fs::write(&corpus_path, corpus).unwrap();
    let model = dir.path().join("model");
    let out = reda(&["train-lm", "--pretokenized", "--corpus", p(&corpus_path), "--out", p(&model)]);
    (out, model)
}

const CORPUS: &str = "the cat sat on the mat\nthe dog sat on the rug\na cat and a dog\n";

#[test]
fn train_lm_writes_model_files_deterministically() {
    let dir = TempDir::new().unwrap();
    let (out, model) = train(&dir, CORPUS);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let names = ["unigram.json", "bigram.json", "trigram.json", "fourgram.json", "meta.json"];
    let first: Vec<Vec<u8>> = names.iter().map(|n| fs::read(model.join(n)).unwrap()).collect();

    let (again, _) = train(&dir, CORPUS);
    assert_eq!(code(&again), 0);
    for (n, bytes) in names.iter().zip(&first) {
        assert_eq!(&fs::read(model.join(n)).unwrap(), bytes, "{n} changed between runs");
    }
}

#[test]
fn train_lm_rejects_empty_corpus() {
    let dir = TempDir::new().unwrap();
    let (out, _) = train(&dir, "\n\n");
    assert_eq!(code(&out), 2);
}

#[test]
fn score_of_training_line_is_zero() {
    let dir = TempDir::new().unwrap();
    let (_, model) = train(&dir, "a b\n");
    let out = reda(&["score", "--pretokenized", "--model", p(&model), "--text", "a b"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lp: f64 = stdout.trim().rsplit('\t').next().unwrap().parse().unwrap();
    assert_eq!(lp, 0.0);
}

#[test]
fn score_reports_bad_model() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope");
    assert_eq!(code(&reda(&["score", "--model", p(&missing), "--text", "a"])), 2);

    let (_, model) = train(&dir, CORPUS);
    fs::write(model.join("bigram.json"), "{not json").unwrap();
    assert_eq!(code(&reda(&["score", "--model", p(&model), "--text", "a"])), 2);
}

fn write_inputs(dir: &TempDir) -> (std::path::PathBuf, std::path::PathBuf) {
    let input = dir.path().join("train.tsv");
    fs::write(&input, "the cat sat on the mat\tthe dog sat on the rug\t1\na cat and a dog\tthe mat\t0\n").unwrap();
    let syn = dir.path().join("syn.json");
    fs::write(&syn, r#"{"cat":["kitten","feline"],"dog":["hound"],"sat":["rested"]}"#).unwrap();
    (input, syn)
}

#[test]
fn augment_ng_requires_model() {
    let dir = TempDir::new().unwrap();
    let (input, syn) = write_inputs(&dir);
    let output = dir.path().join("out.tsv");
    let args = ["augment", "--pretokenized", "--mode", "ng", "--input", p(&input), "--output", p(&output)];
    let out = reda(&[&args[..], &["--synonyms", p(&syn)]].concat());
    assert_eq!(code(&out), 1);
    assert!(!output.exists());
}

#[test]
fn augment_both_preserves_labels() {
    let dir = TempDir::new().unwrap();
    let (_, model) = train(&dir, CORPUS);
    let (input, syn) = write_inputs(&dir);
    let output = dir.path().join("out.tsv");
    let out = reda(&[
        "augment",
        "--pretokenized",
        "--mode",
        "both",
        "--input",
        p(&input),
        "--output",
        p(&output),
        "--synonyms",
        p(&syn),
        "--model",
        p(&model),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let originals = read_tsv(fs::read_to_string(&input).unwrap().as_bytes(), false).unwrap();
    for tag in ["reda", "ng"] {
        let path = dir.path().join(format!("out.{tag}.tsv"));
        let records = read_tsv(fs::read_to_string(&path).unwrap().as_bytes(), false).unwrap();
        assert!(records.len() > originals.len(), "{tag}: no augmented pairs");
        assert_eq!(&records[..originals.len()], &originals[..]);
        let labels: std::collections::BTreeSet<u8> = records[originals.len()..].iter().map(|r| r.label).collect();
        assert_eq!(labels, [0, 1].into_iter().collect(), "{tag}: both labels carried over");
    }
}

#[test]
fn eval_rejects_oversized_sample() {
    let dir = TempDir::new().unwrap();
    let (_, model) = train(&dir, CORPUS);
    let corpus = dir.path().join("corpus.txt");
    let out = reda(&["eval", "--model", p(&model), "--corpus", p(&corpus), "--samples", "50"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(code(&reda(&["--help"])), 0);
    assert_eq!(code(&reda(&["augment", "--help"])), 0);
    assert_eq!(code(&reda(&["no-such-command"])), 1);
    assert_eq!(code(&reda(&["eval", "--model", "m", "--corpus", "c", "--edits", "x"])), 1);
}
