//! The five text-editing operations.
//!
//! Every operation takes a sentence and an explicit RNG and returns one
//! candidate, or `None` when the edit cannot be carried out on that input.
//! Unless `allow_identity` is set, a returned candidate always differs from
//! the input.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::SynonymDict;
use crate::tokenizer::Sentence;

/// Redraws allowed before an edit that keeps reproducing its input gives up.
pub const IDENTITY_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    /// Synonym replacement.
    #[serde(rename = "SR")]
    Sr,
    /// Random swap.
    #[serde(rename = "RS")]
    Rs,
    /// Random insertion of a synonym.
    #[serde(rename = "RI")]
    Ri,
    /// Random deletion.
    #[serde(rename = "RD")]
    Rd,
    /// Random mix of the other four.
    #[serde(rename = "RM")]
    Rm,
}

impl EditKind {
    pub const ALL: [EditKind; 5] = [EditKind::Sr, EditKind::Rs, EditKind::Ri, EditKind::Rd, EditKind::Rm];
    pub const BASIC: [EditKind; 4] = [EditKind::Sr, EditKind::Rs, EditKind::Ri, EditKind::Rd];

    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::Sr => "SR",
            EditKind::Rs => "RS",
            EditKind::Ri => "RI",
            EditKind::Rd => "RD",
            EditKind::Rm => "RM",
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EditKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EditKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown edit operation {s:?}")))
    }
}

/// An operation together with its edit count. For RM the count is the
/// number of sub-operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditOp {
    kind: EditKind,
    k: usize,
}

impl EditOp {
    pub fn new(kind: EditKind, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(format!("{kind} needs at least one edit")));
        }
        if kind == EditKind::Rm && !(2..=4).contains(&k) {
            return Err(Error::InvalidArgument(format!("RM takes 2 to 4 sub-operations, got {k}")));
        }
        Ok(EditOp { kind, k })
    }

    pub fn kind(&self) -> EditKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn apply<R: Rng + ?Sized>(
        &self,
        s: &Sentence,
        dict: &SynonymDict,
        rng: &mut R,
        allow_identity: bool,
    ) -> Option<Sentence> {
        match self.kind {
            EditKind::Sr => synonym_replace(s, dict, self.k, rng, allow_identity),
            EditKind::Rs => random_swap(s, self.k, rng, allow_identity),
            EditKind::Ri => random_insert(s, dict, self.k, rng, allow_identity),
            EditKind::Rd => random_delete(s, self.k, rng, allow_identity),
            EditKind::Rm => random_mix(s, dict, self.k, rng, allow_identity),
        }
    }
}

fn retry_until_changed<R, F>(s: &Sentence, rng: &mut R, allow_identity: bool, mut attempt: F) -> Option<Sentence>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Option<Sentence>,
{
    for _ in 0..=IDENTITY_RETRIES {
        let out = attempt(rng)?;
        if allow_identity || out != *s {
            return Some(out);
        }
    }
    None
}

/// Positions whose word has at least one synonym.
pub fn eligible_positions(s: &Sentence, dict: &SynonymDict) -> Vec<usize> {
    s.tokens()
        .iter()
        .enumerate()
        .filter(|(_, w)| dict.contains(w))
        .map(|(i, _)| i)
        .collect()
}

/// Replaces the word at each of `positions` by a uniformly drawn synonym.
/// Without `allow_identity`, a draw equal to the replaced word is redrawn
/// up to [`IDENTITY_RETRIES`] times before giving up.
pub fn replace_at<R: Rng + ?Sized>(
    s: &Sentence,
    positions: &[usize],
    dict: &SynonymDict,
    rng: &mut R,
    allow_identity: bool,
) -> Option<Sentence> {
    let mut out = s.clone();
    for &pos in positions {
        let word = &s.tokens()[pos];
        let syns = dict.lookup(word);
        let mut pick = syns.choose(rng)?;
        let mut redraws = 0;
        while !allow_identity && pick == word {
            if redraws == IDENTITY_RETRIES {
                return None;
            }
            pick = syns.choose(rng)?;
            redraws += 1;
        }
        out.tokens_mut()[pos] = pick.clone();
    }
    Some(out)
}

/// Replaces the words at `k` distinct eligible positions. Other occurrences
/// of a replaced word are left alone.
pub fn synonym_replace<R: Rng + ?Sized>(
    s: &Sentence,
    dict: &SynonymDict,
    k: usize,
    rng: &mut R,
    allow_identity: bool,
) -> Option<Sentence> {
    assert!(k >= 1, "edit count must be positive");
    let eligible = eligible_positions(s, dict);
    if eligible.len() < k {
        return None;
    }
    let positions: Vec<usize> = index::sample(rng, eligible.len(), k)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    replace_at(s, &positions, dict, rng, allow_identity)
}

/// Swaps `k` independently drawn position pairs.
pub fn random_swap<R: Rng + ?Sized>(s: &Sentence, k: usize, rng: &mut R, allow_identity: bool) -> Option<Sentence> {
    assert!(k >= 1, "edit count must be positive");
    let n = s.len();
    if n < 2 {
        return None;
    }
    retry_until_changed(s, rng, allow_identity, |rng| {
        let mut out = s.clone();
        for _ in 0..k {
            let pair = index::sample(rng, n, 2);
            out.tokens_mut().swap(pair.index(0), pair.index(1));
        }
        Some(out)
    })
}

/// Inserts `k` synonyms of randomly chosen words of `s` at random positions,
/// both ends included.
pub fn random_insert<R: Rng + ?Sized>(
    s: &Sentence,
    dict: &SynonymDict,
    k: usize,
    rng: &mut R,
    _allow_identity: bool,
) -> Option<Sentence> {
    assert!(k >= 1, "edit count must be positive");
    // Output is always longer than the input, so never an identity.
    let eligible = eligible_positions(s, dict);
    if eligible.is_empty() {
        return None;
    }
    let mut out = s.clone();
    for _ in 0..k {
        let &pos = eligible.choose(rng)?;
        let syn = dict.lookup(&s.tokens()[pos]).choose(rng)?.clone();
        let at = rng.random_range(0..=out.len());
        out.tokens_mut().insert(at, syn);
    }
    Some(out)
}

/// Deletes `k` distinct positions, always leaving at least one token.
pub fn random_delete<R: Rng + ?Sized>(s: &Sentence, k: usize, rng: &mut R, _allow_identity: bool) -> Option<Sentence> {
    assert!(k >= 1, "edit count must be positive");
    let n = s.len();
    if k >= n {
        return None;
    }
    let mut drop = vec![false; n];
    for i in index::sample(rng, n, k) {
        drop[i] = true;
    }
    let kept = s
        .tokens()
        .iter()
        .zip(&drop)
        .filter(|(_, d)| !**d)
        .map(|(t, _)| t.clone())
        .collect();
    Some(Sentence::from_vec_unchecked(kept))
}

/// Applies `m` distinct basic operations, one edit each, in random order.
/// An infeasible draw is replaced by one of the remaining operations.
///
/// # Panics
///
/// If `m` is outside `2..=4`.
pub fn random_mix<R: Rng + ?Sized>(
    s: &Sentence,
    dict: &SynonymDict,
    m: usize,
    rng: &mut R,
    allow_identity: bool,
) -> Option<Sentence> {
    assert!((2..=4).contains(&m), "RM takes 2 to 4 sub-operations, got {m}");
    retry_until_changed(s, rng, allow_identity, |rng| {
        let mut order = EditKind::BASIC;
        order.shuffle(rng);
        let mut cur = s.clone();
        let mut applied = 0;
        for kind in order {
            if applied == m {
                break;
            }
            let op = EditOp { kind, k: 1 };
            if let Some(next) = op.apply(&cur, dict, rng, allow_identity) {
                cur = next;
                applied += 1;
            }
        }
        (applied == m).then_some(cur)
    })
}
