//! Candidate pools, REDA / n-gram selection, and dataset cross pairing.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::edit_ops::{EditKind, EditOp};
use crate::error::{Error, Result};
use crate::lexicon::SynonymDict;
use crate::ngram::{NGramModel, ScoredText};
use crate::record::TextPairRecord;
use crate::rng_for;
use crate::tokenizer::{Sentence, TextCodec};

pub const DEFAULT_SEED: u64 = 2022;

/// Which selection program(s) to run over a candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Uniform random selection.
    Reda,
    /// Highest language-model score.
    Ng,
    /// Both, drawn from one shared pool.
    Both,
}

impl Mode {
    pub fn runs_reda(self) -> bool {
        matches!(self, Mode::Reda | Mode::Both)
    }

    pub fn runs_ng(self) -> bool {
        matches!(self, Mode::Ng | Mode::Both)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reda" => Ok(Mode::Reda),
            "ng" => Ok(Mode::Ng),
            "both" => Ok(Mode::Both),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Reda => "reda",
            Mode::Ng => "ng",
            Mode::Both => "both",
        })
    }
}

/// One of the two selection programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Reda,
    Ng,
}

impl Program {
    pub fn as_str(self) -> &'static str {
        match self {
            Program::Reda => "reda",
            Program::Ng => "ng",
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub sr_rate: f64,
    pub rs_rate: f64,
    pub ri_rate: f64,
    pub rd_rate: f64,
    pub rm_subops: usize,
    pub outputs_per_op: BTreeMap<EditKind, usize>,
    pub pool_size: usize,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            sr_rate: 0.2,
            rs_rate: 0.2,
            ri_rate: 0.1,
            rd_rate: 0.1,
            rm_subops: 2,
            outputs_per_op: Self::small_set_outputs(),
            pool_size: 20,
            mode: Mode::Reda,
            seed: DEFAULT_SEED,
        }
    }
}

impl AugmentConfig {
    /// Two outputs for SR and RS, one for RI, RD and RM.
    pub fn small_set_outputs() -> BTreeMap<EditKind, usize> {
        EditKind::ALL
            .into_iter()
            .map(|k| (k, if matches!(k, EditKind::Sr | EditKind::Rs) { 2 } else { 1 }))
            .collect()
    }

    /// One output per operation.
    pub fn large_set_outputs() -> BTreeMap<EditKind, usize> {
        EditKind::ALL.into_iter().map(|k| (k, 1)).collect()
    }

    pub fn rate(&self, kind: EditKind) -> f64 {
        match kind {
            EditKind::Sr => self.sr_rate,
            EditKind::Rs => self.rs_rate,
            EditKind::Ri => self.ri_rate,
            EditKind::Rd => self.rd_rate,
            EditKind::Rm => 0.0,
        }
    }

    pub fn outputs(&self, kind: EditKind) -> usize {
        self.outputs_per_op.get(&kind).copied().unwrap_or(0)
    }

    /// The edit applied to a sentence of `word_count` words.
    pub fn edit_op(&self, kind: EditKind, word_count: usize) -> Result<EditOp> {
        match kind {
            EditKind::Rm => EditOp::new(kind, self.rm_subops),
            _ => EditOp::new(kind, num_edits(word_count, self.rate(kind))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in EditKind::BASIC {
            let r = self.rate(kind);
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{kind} rate {r} outside [0, 1]")));
            }
        }
        if !(2..=4).contains(&self.rm_subops) {
            return Err(Error::Config(format!("RM sub-operations {} outside 2..=4", self.rm_subops)));
        }
        if self.pool_size == 0 {
            return Err(Error::Config("pool size must be positive".into()));
        }
        for (kind, &n) in &self.outputs_per_op {
            if n > self.pool_size {
                return Err(Error::Config(format!(
                    "{kind} outputs {n} exceed pool size {}",
                    self.pool_size
                )));
            }
        }
        Ok(())
    }
}

/// Number of edits for a text: `word_count * rate` rounded half to even,
/// never below one.
pub fn num_edits(word_count: usize, rate: f64) -> usize {
    let x = word_count as f64 * rate;
    let floor = x.floor();
    // Products such as 15 * 0.1 land a hair off .5 in binary.
    let rounded = if (x - floor - 0.5).abs() < 1e-9 {
        if floor % 2.0 == 0.0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        x.round()
    };
    (rounded as usize).max(1)
}

/// Distinct candidates produced by one operation, never containing the
/// source sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub op: EditKind,
    pub candidates: Vec<Sentence>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Calls `op` until `pool_size` distinct candidates are collected or
/// `5 * pool_size` attempts have been made.
pub fn collect_pool<R: Rng + ?Sized>(
    s: &Sentence,
    op: EditOp,
    pool_size: usize,
    dict: &SynonymDict,
    rng: &mut R,
) -> CandidatePool {
    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    for _ in 0..5 * pool_size {
        if candidates.len() == pool_size {
            break;
        }
        if let Some(c) = op.apply(s, dict, rng, false) {
            if c != *s && seen.insert(c.clone()) {
                candidates.push(c);
            }
        }
    }
    CandidatePool {
        op: op.kind(),
        candidates,
    }
}

pub fn build_pool<R: Rng + ?Sized>(
    s: &Sentence,
    kind: EditKind,
    cfg: &AugmentConfig,
    dict: &SynonymDict,
    rng: &mut R,
) -> CandidatePool {
    match cfg.edit_op(kind, s.len()) {
        Ok(op) => collect_pool(s, op, cfg.pool_size, dict, rng),
        Err(_) => CandidatePool {
            op: kind,
            candidates: Vec::new(),
        },
    }
}

/// Scores candidates and orders them best first; equal scores fall back to
/// the lexicographic order of the space-joined text.
pub fn rank_by_score(candidates: &[Sentence], model: &NGramModel) -> Vec<ScoredText> {
    let mut scored: Vec<(String, ScoredText)> = candidates.iter().map(|c| (c.key(), model.score(c))).collect();
    scored.sort_by(|a, b| b.1.log_prob.total_cmp(&a.1.log_prob).then_with(|| a.0.cmp(&b.0)));
    scored.into_iter().map(|(_, s)| s).collect()
}

/// Texts picked from one pool. A program that did not run leaves its list
/// empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub reda: Vec<Sentence>,
    pub ng: Vec<Sentence>,
}

impl Selection {
    pub fn get(&self, program: Program) -> &[Sentence] {
        match program {
            Program::Reda => &self.reda,
            Program::Ng => &self.ng,
        }
    }
}

fn require_model(mode: Mode, model: Option<&NGramModel>) -> Result<Option<&NGramModel>> {
    if mode.runs_ng() && model.is_none() {
        return Err(Error::Config(format!("mode {mode} needs a language model")));
    }
    Ok(model)
}

pub fn select<R: Rng + ?Sized>(
    pool: &CandidatePool,
    n_out: usize,
    mode: Mode,
    model: Option<&NGramModel>,
    rng: &mut R,
) -> Result<Selection> {
    let model = require_model(mode, model)?;
    let take = n_out.min(pool.len());
    let mut out = Selection::default();
    if mode.runs_reda() {
        out.reda = index::sample(rng, pool.len(), take)
            .into_iter()
            .map(|i| pool.candidates[i].clone())
            .collect();
    }
    if let (true, Some(model)) = (mode.runs_ng(), model) {
        out.ng = rank_by_score(&pool.candidates, model)
            .into_iter()
            .take(take)
            .map(|s| s.sentence)
            .collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpOutput {
    pub pool: CandidatePool,
    pub selection: Selection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextAugmentation {
    pub source: Sentence,
    pub ops: Vec<OpOutput>,
}

impl TextAugmentation {
    /// Selected texts of one program across all operations, in operation
    /// order with duplicates removed.
    pub fn outputs(&self, program: Program) -> Vec<Sentence> {
        let mut seen = HashSet::new();
        self.ops
            .iter()
            .flat_map(|o| o.selection.get(program))
            .filter(|s| **s != self.source && seen.insert((*s).clone()))
            .cloned()
            .collect()
    }
}

/// Builds a pool and selects from it for each of the five operations.
pub fn augment_text<R: Rng + ?Sized>(
    s: &Sentence,
    cfg: &AugmentConfig,
    dict: &SynonymDict,
    model: Option<&NGramModel>,
    rng: &mut R,
) -> Result<TextAugmentation> {
    require_model(cfg.mode, model)?;
    let mut ops = Vec::with_capacity(EditKind::ALL.len());
    for kind in EditKind::ALL {
        let n_out = cfg.outputs(kind);
        if n_out == 0 {
            continue;
        }
        let pool = build_pool(s, kind, cfg, dict, rng);
        let selection = select(&pool, n_out, cfg.mode, model, rng)?;
        ops.push(OpOutput { pool, selection });
    }
    Ok(TextAugmentation {
        source: s.clone(),
        ops,
    })
}

/// Pairs every augment of `text_a` with the original `text_b` and vice
/// versa, copying the label. No deduplication.
pub fn cross_pair(rec: &TextPairRecord, augs_a: &[String], augs_b: &[String]) -> Vec<TextPairRecord> {
    augs_a
        .iter()
        .map(|a| TextPairRecord {
            text_a: a.clone(),
            text_b: rec.text_b.clone(),
            label: rec.label,
        })
        .chain(augs_b.iter().map(|b| TextPairRecord {
            text_a: rec.text_a.clone(),
            text_b: b.clone(),
            label: rec.label,
        }))
        .collect()
}

/// Drops pairs equal to an earlier pair or to anything in `seen`, which is
/// updated in place.
pub fn dedup_pairs(pairs: Vec<TextPairRecord>, seen: &mut HashSet<TextPairRecord>) -> Vec<TextPairRecord> {
    pairs.into_iter().filter(|p| seen.insert(p.clone())).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairAugmentation {
    pub reda: Vec<TextPairRecord>,
    pub ng: Vec<TextPairRecord>,
}

impl PairAugmentation {
    pub fn get(&self, program: Program) -> &[TextPairRecord] {
        match program {
            Program::Reda => &self.reda,
            Program::Ng => &self.ng,
        }
    }
}

fn programs(mode: Mode) -> impl Iterator<Item = Program> {
    [
        mode.runs_reda().then_some(Program::Reda),
        mode.runs_ng().then_some(Program::Ng),
    ]
    .into_iter()
    .flatten()
}

pub fn augment_pair<R: Rng + ?Sized>(
    rec: &TextPairRecord,
    cfg: &AugmentConfig,
    codec: &TextCodec,
    dict: &SynonymDict,
    model: Option<&NGramModel>,
    rng: &mut R,
) -> Result<PairAugmentation> {
    let aug_a = augment_text(&codec.tokenize(&rec.text_a), cfg, dict, model, rng)?;
    let aug_b = augment_text(&codec.tokenize(&rec.text_b), cfg, dict, model, rng)?;
    let render = |a: &TextAugmentation, p: Program| -> Vec<String> {
        a.outputs(p)
            .iter()
            .map(|s| codec.detokenize(s))
            .filter(|t| !t.trim().is_empty())
            .collect()
    };
    let mut out = PairAugmentation::default();
    for program in programs(cfg.mode) {
        let pairs = cross_pair(rec, &render(&aug_a, program), &render(&aug_b, program));
        let mut seen = HashSet::from([rec.clone()]);
        let pairs = dedup_pairs(pairs, &mut seen);
        match program {
            Program::Reda => out.reda = pairs,
            Program::Ng => out.ng = pairs,
        }
    }
    Ok(out)
}

/// Augments every record, each with its own RNG stream derived from
/// `(cfg.seed, record index)`, then removes augmented pairs that repeat an
/// original record or an earlier augmented pair.
pub fn augment_dataset(
    records: &[TextPairRecord],
    cfg: &AugmentConfig,
    codec: &TextCodec,
    dict: &SynonymDict,
    model: Option<&NGramModel>,
) -> Result<PairAugmentation> {
    cfg.validate()?;
    require_model(cfg.mode, model)?;
    let per_record: Vec<PairAugmentation> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| augment_pair(rec, cfg, codec, dict, model, &mut rng_for(cfg.seed, i as u64)))
        .collect::<Result<_>>()?;

    let mut out = PairAugmentation::default();
    for program in programs(cfg.mode) {
        let mut seen: HashSet<TextPairRecord> = records.iter().cloned().collect();
        let merged = per_record
            .iter()
            .flat_map(|p| p.get(program).iter().cloned())
            .collect();
        let merged = dedup_pairs(merged, &mut seen);
        match program {
            Program::Reda => out.reda = merged,
            Program::Ng => out.ng = merged,
        }
    }
    Ok(out)
}
