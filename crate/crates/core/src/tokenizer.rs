//! Word segmentation.
//!
//! Two segmenters are built in: whitespace splitting for pre-tokenized
//! corpora and a greedy longest-match segmenter driven by a word lexicon
//! for unsegmented scripts. Anything else can be plugged in by building
//! [`Sentence`] values directly.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The reserved separator between tokens in model keys and output files.
pub const SEPARATOR: char = ' ';

/// An ordered sequence of word tokens.
///
/// Tokens are never empty and never contain [`SEPARATOR`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sentence(Vec<String>);

impl Sentence {
    /// Builds a sentence, rejecting empty tokens and tokens containing a space.
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for t in &tokens {
            if t.is_empty() {
                return Err(Error::Format("empty token".into()));
            }
            if t.contains(SEPARATOR) {
                return Err(Error::Format(format!("token {t:?} contains a space")));
            }
        }
        Ok(Sentence(tokens))
    }

    /// Caller guarantees the token invariant.
    pub(crate) fn from_vec_unchecked(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty() && !t.contains(SEPARATOR)));
        Sentence(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    /// Tokens joined by a single space.
    pub fn key(&self) -> String {
        self.0.join(" ")
    }

    pub(crate) fn tokens_mut(&mut self) -> &mut Vec<String> {
        &mut self.0
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Word list for greedy longest-match segmentation.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    words: HashSet<String>,
    max_chars: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>) {
        let word = word.into();
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return;
        }
        self.max_chars = self.max_chars.max(word.chars().count());
        self.words.insert(word);
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

    /// Reads one word per line; blank lines are ignored.
    pub fn from_lines<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        lines.into_iter().collect()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Lexicon {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        let mut lex = Lexicon::new();
        for w in iter {
            lex.insert(w.as_ref().trim());
        }
        lex
    }
}

#[derive(Debug, Clone)]
pub enum TokenizeMode {
    Whitespace,
    DictGreedy(Lexicon),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Joiner {
    Space,
    Empty,
}

impl Joiner {
    fn as_str(self) -> &'static str {
        match self {
            Joiner::Space => " ",
            Joiner::Empty => "",
        }
    }
}

pub fn tokenize(text: &str, mode: &TokenizeMode) -> Sentence {
    match mode {
        TokenizeMode::Whitespace => {
            Sentence::from_vec_unchecked(text.split_whitespace().map(str::to_owned).collect())
        }
        TokenizeMode::DictGreedy(lexicon) => {
            let mut out = Vec::new();
            for run in text.split_whitespace() {
                greedy_segment(run, lexicon, &mut out);
            }
            Sentence::from_vec_unchecked(out)
        }
    }
}

// Left-to-right longest match; unmatched characters become single tokens.
fn greedy_segment(run: &str, lexicon: &Lexicon, out: &mut Vec<String>) {
    let bounds: Vec<usize> = run
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(run.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    let mut i = 0;
    while i < n_chars {
        let longest = lexicon.max_chars.min(n_chars - i);
        let end = (2..=longest)
            .rev()
            .find(|&len| lexicon.contains(&run[bounds[i]..bounds[i + len]]))
            .unwrap_or(1);
        out.push(run[bounds[i]..bounds[i + end]].to_owned());
        i += end;
    }
}

pub fn detokenize(sentence: &Sentence, joiner: Joiner) -> String {
    sentence.tokens().join(joiner.as_str())
}

/// A segmenter paired with the joiner that undoes it.
#[derive(Debug, Clone)]
pub struct TextCodec {
    pub mode: TokenizeMode,
    pub joiner: Joiner,
}

impl TextCodec {
    pub fn whitespace() -> Self {
        TextCodec {
            mode: TokenizeMode::Whitespace,
            joiner: Joiner::Space,
        }
    }

    pub fn dict_greedy(lexicon: Lexicon) -> Self {
        TextCodec {
            mode: TokenizeMode::DictGreedy(lexicon),
            joiner: Joiner::Empty,
        }
    }

    pub fn tokenize(&self, text: &str) -> Sentence {
        tokenize(text, &self.mode)
    }

    pub fn detokenize(&self, sentence: &Sentence) -> String {
        detokenize(sentence, self.joiner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(tokens: &[&str]) -> Sentence {
        Sentence::new(tokens.iter().copied()).unwrap()
    }

    #[test]
    fn whitespace_splits_runs() {
        let mode = TokenizeMode::Whitespace;
        assert_eq!(tokenize("how are you", &mode), s(&["how", "are", "you"]));
        assert_eq!(tokenize("  how \t are  ", &mode), s(&["how", "are"]));
        assert!(tokenize("", &mode).is_empty());
    }

    #[test]
    fn greedy_prefers_longest_match() {
        let lex: Lexicon = ["ab", "c"].into_iter().collect();
        let mode = TokenizeMode::DictGreedy(lex);
        assert_eq!(tokenize("abc", &mode), s(&["ab", "c"]));

        let lex: Lexicon = ["a", "ab", "abc", "cd"].into_iter().collect();
        let mode = TokenizeMode::DictGreedy(lex);
        assert_eq!(tokenize("abcd", &mode), s(&["abc", "d"]));
    }

    #[test]
    fn greedy_falls_back_to_single_chars() {
        let lex: Lexicon = ["中国"].into_iter().collect();
        let mode = TokenizeMode::DictGreedy(lex);
        assert_eq!(tokenize("我爱中国人", &mode), s(&["我", "爱", "中国", "人"]));
        let empty = TokenizeMode::DictGreedy(Lexicon::new());
        assert_eq!(tokenize("xyz", &empty), s(&["x", "y", "z"]));
    }

    #[test]
    fn greedy_drops_whitespace() {
        let lex: Lexicon = ["ab"].into_iter().collect();
        let mode = TokenizeMode::DictGreedy(lex);
        assert_eq!(tokenize("ab a b", &mode), s(&["ab", "a", "b"]));
    }

    #[test]
    fn detokenize_joiners() {
        assert_eq!(detokenize(&s(&["a", "b"]), Joiner::Space), "a b");
        assert_eq!(detokenize(&s(&["a", "b"]), Joiner::Empty), "ab");
        assert_eq!(detokenize(&s(&[]), Joiner::Space), "");
    }

    #[test]
    fn sentence_rejects_bad_tokens() {
        assert!(Sentence::new(["a b"]).is_err());
        assert!(Sentence::new([""]).is_err());
        assert!(Sentence::new(["a", "b"]).is_ok());
    }

    proptest! {
        #[test]
        fn whitespace_round_trip(tokens in prop::collection::vec("[^\\s]{1,6}", 0..12)) {
            let sent = Sentence::new(tokens.clone()).unwrap();
            let text = detokenize(&sent, Joiner::Space);
            prop_assert_eq!(tokenize(&text, &TokenizeMode::Whitespace).into_tokens(), tokens);
        }

        #[test]
        fn greedy_concatenates_back(
            text in "[abc中国人]{0,20}",
            words in prop::collection::vec("[abc中国人]{1,3}", 0..8),
        ) {
            let lex: Lexicon = words.iter().collect();
            let out = tokenize(&text, &TokenizeMode::DictGreedy(lex));
            prop_assert_eq!(detokenize(&out, Joiner::Empty), text);
        }
    }
}
