//! Synonym dictionaries, including the pseudo dictionary used by the
//! synonym-replacement restoration experiment.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ngram::NGramModel;
use crate::tokenizer::SEPARATOR;

/// Number of entries per pseudo-dictionary headword, the headword included.
pub const PSEUDO_OPTIONS: usize = 4;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymDict {
    entries: HashMap<String, Vec<String>>,
}

fn check_token(t: &str) -> Result<()> {
    if t.is_empty() || t.contains(SEPARATOR) || t.contains('\t') || t.contains('\n') {
        return Err(Error::Format(format!("invalid dictionary token {t:?}")));
    }
    Ok(())
}

impl SynonymDict {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds synonyms for `word`, dropping duplicates and keeping first-seen
    /// order. A word with no synonyms is not stored.
    pub fn insert<I, S>(&mut self, word: impl Into<String>, synonyms: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let word = word.into();
        check_token(&word)?;
        let existing = self.entries.remove(&word).unwrap_or_default();
        let mut seen: HashSet<String> = existing.iter().cloned().collect();
        let mut list = existing;
        for syn in synonyms {
            let syn = syn.into();
            check_token(&syn)?;
            if seen.insert(syn.clone()) {
                list.push(syn);
            }
        }
        if !list.is_empty() {
            self.entries.insert(word, list);
        }
        Ok(())
    }

    /// Synonyms of `word`; empty when the word is absent.
    pub fn lookup(&self, word: &str) -> &[String] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by headword.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        let sorted: BTreeMap<&str, &[String]> =
            self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice())).collect();
        sorted.into_iter()
    }

    /// Every headword and synonym.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .flat_map(|(k, v)| std::iter::once(k.as_str()).chain(v.iter().map(String::as_str)))
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(json).map_err(|e| Error::Format(format!("synonym dictionary: {e}")))?;
        let mut dict = SynonymDict::new();
        for (word, syns) in raw {
            dict.insert(word, syns)?;
        }
        Ok(dict)
    }

    pub fn to_json_string(&self) -> String {
        let sorted: BTreeMap<&str, &Vec<String>> = self.entries.iter().map(|(k, v)| (k.as_str(), v)).collect();
        let mut out = serde_json::to_string(&sorted).expect("string map serialises");
        out.push('\n');
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}

/// Reads a JSON object mapping each word to an array of synonyms.
pub fn load_synonyms(path: impl AsRef<Path>) -> Result<SynonymDict> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SynonymDict::from_json_str(&text)
}

/// Builds a dictionary of `size` headwords drawn from the unigram frequency
/// ranks `rank_min..=rank_max` (1-based). Each headword maps to itself plus
/// three other distinct words from the same band.
pub fn gen_pseudo_dict<R: Rng + ?Sized>(
    model: &NGramModel,
    rank_min: usize,
    rank_max: usize,
    size: usize,
    rng: &mut R,
) -> Result<SynonymDict> {
    if rank_min == 0 || rank_min >= rank_max {
        return Err(Error::InvalidArgument(format!(
            "rank band [{rank_min}, {rank_max}] must satisfy 1 <= min < max"
        )));
    }
    if size > rank_max - rank_min {
        return Err(Error::InvalidArgument(format!(
            "size {size} exceeds rank band width {}",
            rank_max - rank_min
        )));
    }
    let ranking = model.unigram_ranking();
    if ranking.len() < rank_max {
        return Err(Error::Capacity(format!(
            "vocabulary has {} words, rank band needs {rank_max}",
            ranking.len()
        )));
    }
    let band: Vec<&str> = ranking[rank_min - 1..rank_max].iter().map(|(w, _)| *w).collect();
    if band.len() < PSEUDO_OPTIONS {
        return Err(Error::Capacity(format!(
            "rank band holds {} words, need at least {PSEUDO_OPTIONS}",
            band.len()
        )));
    }

    let mut dict = SynonymDict::new();
    for head in index::sample(rng, band.len(), size) {
        let mut list = vec![band[head].to_owned()];
        // Draw from the band with the headword's slot removed.
        for j in index::sample(rng, band.len() - 1, PSEUDO_OPTIONS - 1) {
            let j = if j >= head { j + 1 } else { j };
            list.push(band[j].to_owned());
        }
        dict.entries.insert(band[head].to_owned(), list);
    }
    Ok(dict)
}
