//! Word n-gram language model (orders 1 to 4) with stupid backoff.
//!
//! Each corpus line is wrapped in `<START>` / `<END>` and every contiguous
//! n-gram inside the line is counted. Counts are turned into per-order
//! relative frequencies. A sentence is scored by tiling its wrapped token
//! sequence into seen n-grams and summing the log frequencies; the score is
//! the best such tiling. Unseen higher-order grams simply contribute no tile,
//! and unseen unigrams fall back to the frequency of a one-off unigram.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{Sentence, TokenizeMode};

pub const START: &str = "<START>";
pub const END: &str = "<END>";
pub const MAX_ORDER: usize = 4;

const TABLE_FILES: [&str; MAX_ORDER] = ["unigram.json", "bigram.json", "trigram.json", "fourgram.json"];
const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Drop n-grams seen fewer than this many times. `None` keeps everything.
    pub min_count: Option<u64>,
}

/// Relative-frequency tables for orders 1..=4 plus the totals they were
/// normalised by.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    tables: [HashMap<String, f64>; MAX_ORDER],
    totals: [u64; MAX_ORDER],
    hapax_freq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredText {
    pub sentence: Sentence,
    /// Natural log, never positive.
    pub log_prob: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    totals: BTreeMap<String, u64>,
    hapax_freq: f64,
    max_order: usize,
}

type Counts = [HashMap<String, u64>; MAX_ORDER];

fn count_line(tokens: &[String], counts: &mut Counts) {
    let seq: Vec<&str> = std::iter::once(START)
        .chain(tokens.iter().map(String::as_str))
        .chain(std::iter::once(END))
        .collect();
    for (order, table) in counts.iter_mut().enumerate() {
        let n = order + 1;
        for gram in seq.windows(n) {
            *table.entry(gram.join(" ")).or_insert(0) += 1;
        }
    }
}

fn merge_counts(mut a: Counts, b: Counts) -> Counts {
    for (dst, src) in a.iter_mut().zip(b) {
        for (k, v) in src {
            *dst.entry(k).or_insert(0) += v;
        }
    }
    a
}

/// Trains on raw text lines, segmenting each with `mode`.
pub fn train<I, S>(corpus: I, mode: &TokenizeMode) -> Result<NGramModel>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    train_with(corpus, mode, &TrainOptions::default())
}

pub fn train_with<I, S>(corpus: I, mode: &TokenizeMode, opts: &TrainOptions) -> Result<NGramModel>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let lines: Vec<String> = corpus.into_iter().map(|l| l.as_ref().to_owned()).collect();
    let sentences: Vec<Sentence> = lines
        .par_iter()
        .map(|l| crate::tokenizer::tokenize(l, mode))
        .collect();
    train_sentences(&sentences, opts)
}

/// Trains on already-segmented sentences. Empty sentences are skipped.
pub fn train_sentences(sentences: &[Sentence], opts: &TrainOptions) -> Result<NGramModel> {
    if let Some(bad) = sentences
        .iter()
        .flat_map(|s| s.tokens())
        .find(|t| *t == START || *t == END)
    {
        return Err(Error::Training(format!("corpus contains reserved token {bad}")));
    }
    let non_empty = sentences.iter().filter(|s| !s.is_empty()).count();
    if non_empty == 0 {
        return Err(Error::Training("corpus has no non-empty lines".into()));
    }

    // Count merging is commutative, so the result does not depend on how
    // rayon splits the work.
    let mut counts = sentences
        .par_iter()
        .filter(|s| !s.is_empty())
        .fold(Counts::default, |mut acc, s| {
            count_line(s.tokens(), &mut acc);
            acc
        })
        .reduce(Counts::default, merge_counts);

    if let Some(min) = opts.min_count {
        for table in counts.iter_mut() {
            table.retain(|_, c| *c >= min);
        }
    }

    let mut totals = [0u64; MAX_ORDER];
    for (total, table) in totals.iter_mut().zip(&counts) {
        *total = table.values().sum();
    }
    if totals[0] == 0 {
        return Err(Error::Training("no unigrams left after min-count pruning".into()));
    }

    let tables = std::array::from_fn(|order| {
        let total = totals[order] as f64;
        counts[order]
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / total))
            .collect()
    });
    // A count-1 unigram has relative frequency 1/total; that value is also the
    // fallback when the table has no one-off entries.
    let hapax_freq = 1.0 / totals[0] as f64;

    Ok(NGramModel {
        tables,
        totals,
        hapax_freq,
    })
}

impl NGramModel {
    pub fn max_order(&self) -> usize {
        MAX_ORDER
    }

    pub fn hapax_freq(&self) -> f64 {
        self.hapax_freq
    }

    /// Total n-gram occurrences of `order` (1-based).
    pub fn total(&self, order: usize) -> u64 {
        self.totals[order - 1]
    }

    /// Number of distinct n-grams of `order` (1-based).
    pub fn types(&self, order: usize) -> usize {
        self.tables[order - 1].len()
    }

    pub fn table(&self, order: usize) -> &HashMap<String, f64> {
        &self.tables[order - 1]
    }

    /// Relative frequency of a gram of 1..=4 tokens, if it was seen.
    pub fn freq(&self, gram: &[&str]) -> Option<f64> {
        if gram.is_empty() || gram.len() > MAX_ORDER {
            return None;
        }
        self.tables[gram.len() - 1].get(&gram.join(" ")).copied()
    }

    /// Unigram log frequency with hapax smoothing for unseen words.
    fn unigram_log(&self, word: &str) -> f64 {
        self.tables[0]
            .get(word)
            .copied()
            .unwrap_or(self.hapax_freq)
            .ln()
    }

    /// Log frequency of a higher-order gram, `None` when unseen.
    fn gram_log(&self, gram: &[&str], buf: &mut String) -> Option<f64> {
        buf.clear();
        for (i, t) in gram.iter().enumerate() {
            if i > 0 {
                buf.push(' ');
            }
            buf.push_str(t);
        }
        self.tables[gram.len() - 1].get(buf.as_str()).map(|f| f.ln())
    }

    fn wrap(s: &Sentence) -> Vec<&str> {
        std::iter::once(START)
            .chain(s.tokens().iter().map(String::as_str))
            .chain(std::iter::once(END))
            .collect()
    }

    /// Maximum log probability over all tilings of `<START> s <END>` into
    /// seen n-grams, by dynamic programming over end positions.
    pub fn log_prob(&self, s: &Sentence) -> f64 {
        let seq = Self::wrap(s);
        let mut buf = String::new();
        let mut best = vec![f64::NEG_INFINITY; seq.len() + 1];
        best[0] = 0.0;
        for end in 1..=seq.len() {
            let mut top = best[end - 1] + self.unigram_log(seq[end - 1]);
            for n in 2..=MAX_ORDER.min(end) {
                if let Some(lp) = self.gram_log(&seq[end - n..end], &mut buf) {
                    top = top.max(best[end - n] + lp);
                }
            }
            best[end] = top;
        }
        best[seq.len()]
    }

    /// Left-to-right tiling that always takes the longest seen gram.
    /// Kept for comparison with [`NGramModel::log_prob`].
    pub fn log_prob_greedy(&self, s: &Sentence) -> f64 {
        let seq = Self::wrap(s);
        let mut buf = String::new();
        let mut pos = 0;
        let mut total = 0.0;
        while pos < seq.len() {
            let longest = MAX_ORDER.min(seq.len() - pos);
            let hit = (2..=longest)
                .rev()
                .find_map(|n| self.gram_log(&seq[pos..pos + n], &mut buf).map(|lp| (n, lp)));
            let (n, lp) = hit.unwrap_or_else(|| (1, self.unigram_log(seq[pos])));
            total += lp;
            pos += n;
        }
        total
    }

    pub fn score(&self, s: &Sentence) -> ScoredText {
        ScoredText {
            sentence: s.clone(),
            log_prob: self.log_prob(s),
        }
    }

    /// Words (boundary markers excluded) ordered by descending unigram
    /// frequency, ties broken by the word itself.
    pub fn unigram_ranking(&self) -> Vec<(&str, f64)> {
        let mut words: Vec<(&str, f64)> = self.tables[0]
            .iter()
            .filter(|(k, _)| k.as_str() != START && k.as_str() != END)
            .map(|(k, &f)| (k.as_str(), f))
            .collect();
        words.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        words
    }

    /// Writes the four frequency tables and `meta.json` into `dir`.
    /// Keys are sorted so identical models produce identical bytes.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, table) in TABLE_FILES.iter().zip(&self.tables) {
            let sorted: BTreeMap<&str, f64> = table.iter().map(|(k, &v)| (k.as_str(), v)).collect();
            write_json(&dir.join(name), &sorted)?;
        }
        let meta = Meta {
            totals: (1..=MAX_ORDER)
                .map(|o| (o.to_string(), self.totals[o - 1]))
                .collect(),
            hapax_freq: self.hapax_freq,
            max_order: MAX_ORDER,
        };
        write_json(&dir.join(META_FILE), &meta)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta: Meta = read_json(&dir.join(META_FILE))?;
        if meta.max_order != MAX_ORDER {
            return Err(Error::Format(format!(
                "unsupported max_order {} (expected {MAX_ORDER})",
                meta.max_order
            )));
        }
        if !(meta.hapax_freq > 0.0 && meta.hapax_freq <= 1.0) {
            return Err(Error::Format(format!("hapax_freq {} out of (0, 1]", meta.hapax_freq)));
        }
        let mut totals = [0u64; MAX_ORDER];
        for (o, total) in totals.iter_mut().enumerate() {
            *total = *meta
                .totals
                .get(&(o + 1).to_string())
                .ok_or_else(|| Error::Format(format!("meta.json lacks total for order {}", o + 1)))?;
        }

        let mut tables: [HashMap<String, f64>; MAX_ORDER] = Default::default();
        for (o, (name, table)) in TABLE_FILES.iter().zip(tables.iter_mut()).enumerate() {
            let path = dir.join(name);
            let raw: HashMap<String, f64> = read_json(&path)?;
            for (k, &v) in &raw {
                if k.split(' ').count() != o + 1 || k.split(' ').any(str::is_empty) {
                    return Err(Error::Format(format!("{}: key {k:?} is not a {}-gram", path.display(), o + 1)));
                }
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::Format(format!("{}: frequency {v} for {k:?} out of (0, 1]", path.display())));
                }
            }
            *table = raw;
        }
        if tables[0].is_empty() {
            return Err(Error::Format("unigram table is empty".into()));
        }
        Ok(NGramModel {
            tables,
            totals,
            hapax_freq: meta.hapax_freq,
        })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, value).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Format(format!("missing model file {}", path.display())),
        _ => Error::io(path, e),
    })?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(tokens: &[&str]) -> Sentence {
        Sentence::new(tokens.iter().copied()).unwrap()
    }

    fn model(lines: &[&str]) -> NGramModel {
        train(lines.iter().copied(), &TokenizeMode::Whitespace).unwrap()
    }

    // Exhaustive maximisation over every composition of the wrapped
    // sequence into parts of length 1..=4.
    fn brute_force(m: &NGramModel, sent: &Sentence) -> f64 {
        fn go(m: &NGramModel, seq: &[&str]) -> f64 {
            if seq.is_empty() {
                return 0.0;
            }
            let mut best = f64::NEG_INFINITY;
            for n in 1..=MAX_ORDER.min(seq.len()) {
                let tile = match (n, m.freq(&seq[..n])) {
                    (_, Some(f)) => f.ln(),
                    (1, None) => m.hapax_freq().ln(),
                    _ => continue,
                };
                best = best.max(tile + go(m, &seq[n..]));
            }
            best
        }
        let mut seq = vec![START];
        seq.extend(sent.tokens().iter().map(String::as_str));
        seq.push(END);
        go(m, &seq)
    }

    #[test]
    fn single_line_counts() {
        let m = model(&["a b"]);
        for w in [START, "a", "b", END] {
            assert_eq!(m.freq(&[w]), Some(0.25));
        }
        for g in [[START, "a"], ["a", "b"], ["b", END]] {
            assert_eq!(m.freq(&g), Some(1.0 / 3.0));
        }
        assert_eq!(m.freq(&[START, "a", "b"]), Some(0.5));
        assert_eq!(m.freq(&["a", "b", END]), Some(0.5));
        assert_eq!(m.freq(&[START, "a", "b", END]), Some(1.0));
        assert_eq!(m.types(4), 1);
        assert_eq!(m.hapax_freq(), 0.25);
    }

    #[test]
    fn repeated_line_counts() {
        let m = model(&["a", "a"]);
        for w in [START, "a", END] {
            assert_eq!(m.freq(&[w]), Some(2.0 / 6.0));
        }
        assert_eq!(m.total(1), 6);
        // no one-off unigrams: fallback 1/total
        assert_eq!(m.hapax_freq(), 1.0 / 6.0);
    }

    #[test]
    fn no_ngrams_cross_lines() {
        let m = model(&["a", "b"]);
        assert_eq!(m.freq(&["a", "b"]), None);
        assert_eq!(m.freq(&[END, START]), None);
    }

    #[test]
    fn empty_corpus_fails() {
        let empty: [&str; 0] = [];
        assert!(matches!(train(empty, &TokenizeMode::Whitespace), Err(Error::Training(_))));
        assert!(matches!(train(["", "   "], &TokenizeMode::Whitespace), Err(Error::Training(_))));
    }

    #[test]
    fn reserved_tokens_rejected() {
        assert!(matches!(train(["a <END> b"], &TokenizeMode::Whitespace), Err(Error::Training(_))));
    }

    #[test]
    fn score_seen_line_is_zero() {
        let m = model(&["a b"]);
        assert_eq!(m.log_prob(&s(&["a", "b"])), 0.0);
        assert_eq!(brute_force(&m, &s(&["a", "b"])), 0.0);
    }

    #[test]
    fn score_unseen_word_uses_hapax() {
        let m = model(&["a b"]);
        let expected = 3.0 * (0.25f64).ln();
        assert!((m.log_prob(&s(&["z"])) - expected).abs() < 1e-12);
        assert!((brute_force(&m, &s(&["z"])) - expected).abs() < 1e-12);
    }

    #[test]
    fn greedy_scorer_never_beats_dp() {
        let m = model(&["a b c", "b c d", "c d a b", "d"]);
        for sent in [s(&["a", "b", "c", "d"]), s(&["d", "a", "b"]), s(&["x", "c", "d"])] {
            assert!(m.log_prob_greedy(&sent) <= m.log_prob(&sent) + 1e-12);
        }
    }

    #[test]
    fn appending_a_token_can_raise_score_when_it_completes_a_seen_gram() {
        // The wrapped <END> means a longer sentence can match a longer seen
        // gram, so scores are not monotone in length.
        let m = model(&["a x", "a x"]);
        assert!(m.log_prob(&s(&["a", "x"])) > m.log_prob(&s(&["a"])));
    }

    #[test]
    fn min_count_prunes_and_renormalises() {
        let m = train_with(["a b", "a c"], &TokenizeMode::Whitespace, &TrainOptions { min_count: Some(2) }).unwrap();
        assert_eq!(m.freq(&["b"]), None);
        assert_eq!(m.total(1), 6);
        assert_eq!(m.freq(&["a"]), Some(2.0 / 6.0));
        assert_eq!(m.types(4), 0);
    }

    #[test]
    fn save_load_round_trip() {
        let m = model(&["a b c", "b c", "c a b d"]);
        let dir = tempfile::tempdir().unwrap();
        m.save(dir.path()).unwrap();
        let loaded = NGramModel::load(dir.path()).unwrap();
        assert_eq!(loaded, m);
        let sent = s(&["b", "c", "q", "a"]);
        assert!((loaded.log_prob(&sent) - m.log_prob(&sent)).abs() <= 1e-12);
    }

    #[test]
    fn fourgram_file_for_single_line() {
        let dir = tempfile::tempdir().unwrap();
        model(&["a b"]).save(dir.path()).unwrap();
        let raw: HashMap<String, f64> =
            serde_json::from_str(&fs::read_to_string(dir.path().join("fourgram.json")).unwrap()).unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(raw["<START> a b <END>"], 1.0);
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        model(&["a b"]).save(dir.path()).unwrap();
        fs::remove_file(dir.path().join("meta.json")).unwrap();
        assert!(matches!(NGramModel::load(dir.path()), Err(Error::Format(_))));

        let dir = tempfile::tempdir().unwrap();
        model(&["a b"]).save(dir.path()).unwrap();
        fs::write(dir.path().join("bigram.json"), "{not json").unwrap();
        assert!(matches!(NGramModel::load(dir.path()), Err(Error::Format(_))));

        let dir = tempfile::tempdir().unwrap();
        model(&["a b"]).save(dir.path()).unwrap();
        fs::write(dir.path().join("trigram.json"), r#"{"a b": 0.5}"#).unwrap();
        assert!(matches!(NGramModel::load(dir.path()), Err(Error::Format(_))));
    }

    #[test]
    fn ranking_excludes_markers_and_breaks_ties_lexically() {
        let m = model(&["b a", "c a"]);
        let words: Vec<&str> = m.unigram_ranking().into_iter().map(|(w, _)| w).collect();
        assert_eq!(words, vec!["a", "b", "c"]);
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        let word = (0u8..8).prop_map(|i| format!("w{i}"));
        prop::collection::vec(prop::collection::vec(word, 1..6), 1..12)
    }

    proptest! {
        #[test]
        fn dp_matches_brute_force(
            corpus in corpus_strategy(),
            query in prop::collection::vec((0u8..10).prop_map(|i| format!("w{i}")), 0..10),
        ) {
            let sents: Vec<Sentence> = corpus.into_iter().map(|l| Sentence::new(l).unwrap()).collect();
            let m = train_sentences(&sents, &TrainOptions::default()).unwrap();
            let q = Sentence::new(query).unwrap();
            let dp = m.log_prob(&q);
            prop_assert!((dp - brute_force(&m, &q)).abs() <= 1e-9);
            prop_assert!(dp <= 0.0 && dp.is_finite());
        }

        #[test]
        fn counts_are_recoverable(corpus in corpus_strategy()) {
            let sents: Vec<Sentence> = corpus.into_iter().map(|l| Sentence::new(l).unwrap()).collect();
            let m = train_sentences(&sents, &TrainOptions::default()).unwrap();
            for order in 1..=MAX_ORDER {
                let total = m.total(order) as f64;
                let mut sum = 0.0;
                for &f in m.table(order).values() {
                    prop_assert!(f > 0.0 && f <= 1.0);
                    let c = f * total;
                    prop_assert!((c - c.round()).abs() < 1e-9);
                    sum += c;
                }
                prop_assert!((sum - total).abs() < 1e-6);
            }
        }
    }
}
