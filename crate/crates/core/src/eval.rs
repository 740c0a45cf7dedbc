//! Restoration experiments and text-quality metrics.
//!
//! Each restoration task perturbs natural texts, applies the matching edit
//! operation, and counts how often the output is exactly the original. The
//! REDA program takes one random outcome; the n-gram program takes the
//! highest-scoring outcome from the set of all outcomes (or a sample of it
//! when that set exceeds [`POOL_CAP`]).
//!
//! Restoration runs draw two seeds per text from the caller's RNG before
//! doing any work: one for the perturbation and one for the selection. Two
//! runs started from equal RNG states therefore perturb every text the same
//! way, whichever program they evaluate.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::augment::{collect_pool, rank_by_score, Program};
use crate::edit_ops::{eligible_positions, random_delete, random_swap, replace_at, EditKind, EditOp};
use crate::error::{Error, Result};
use crate::lexicon::SynonymDict;
use crate::ngram::NGramModel;
use crate::tokenizer::Sentence;
use crate::ChaCha8Rng;

/// Largest outcome set enumerated exhaustively.
pub const POOL_CAP: usize = 4096;

/// Exact-restoration counts for one batch of texts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Restoration {
    pub attempted: usize,
    pub restored: usize,
}

impl Restoration {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.restored as f64 / self.attempted as f64
        }
    }

    fn tally(outcomes: impl IntoIterator<Item = Option<bool>>) -> Self {
        let mut r = Restoration::default();
        for hit in outcomes.into_iter().flatten() {
            r.attempted += 1;
            r.restored += usize::from(hit);
        }
        r
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("restoration needs at least one edit".into()));
    }
    Ok(())
}

fn need_model(program: Program, model: Option<&NGramModel>) -> Result<Option<&NGramModel>> {
    if program == Program::Ng && model.is_none() {
        return Err(Error::Config("n-gram restoration needs a language model".into()));
    }
    Ok(model)
}

/// Per-text (perturbation, selection) seeds.
fn text_seeds<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(u64, u64)> {
    (0..n).map(|_| (rng.next_u64(), rng.next_u64())).collect()
}

fn argmax_is(original: &Sentence, pool: &[Sentence], model: &NGramModel) -> bool {
    rank_by_score(pool, model)
        .first()
        .is_some_and(|best| best.sentence == *original)
}

fn sampled_pool<F>(mut draw: F) -> Vec<Sentence>
where
    F: FnMut() -> Option<Sentence>,
{
    let mut seen = HashSet::new();
    (0..POOL_CAP)
        .filter_map(|_| draw())
        .filter(|s| seen.insert(s.clone()))
        .collect()
}

/// Synonym-replacement restoration with a pseudo dictionary whose entries
/// contain the headword itself. Texts with fewer than `k` dictionary words
/// are skipped.
pub fn sr_restoration<R: Rng + ?Sized>(
    texts: &[Sentence],
    pdict: &SynonymDict,
    k: usize,
    program: Program,
    model: Option<&NGramModel>,
    rng: &mut R,
) -> Result<Restoration> {
    check_k(k)?;
    let model = need_model(program, model)?;
    let seeds = text_seeds(texts.len(), rng);
    let result = Restoration::tally(texts.par_iter().zip(&seeds).map(|(text, &(ps, ss))| {
        let eligible = eligible_positions(text, pdict);
        if eligible.len() < k {
            return None;
        }
        let mut prng = ChaCha8Rng::seed_from_u64(ps);
        let mut srng = ChaCha8Rng::seed_from_u64(ss);
        let positions: Vec<usize> = index::sample(&mut prng, eligible.len(), k)
            .into_iter()
            .map(|i| eligible[i])
            .collect();
        Some(match (program, model) {
            (Program::Ng, Some(model)) => {
                let pool = all_replacements(text, &positions, pdict)
                    .unwrap_or_else(|| sampled_pool(|| replace_at(text, &positions, pdict, &mut srng, true)));
                argmax_is(text, &pool, model)
            }
            _ => replace_at(text, &positions, pdict, &mut srng, true).as_ref() == Some(text),
        })
    }).collect::<Vec<_>>());
    if result.attempted == 0 {
        return Err(Error::Evaluation(format!("no text has {k} dictionary words")));
    }
    Ok(result)
}

/// Every way of filling `positions` from the dictionary, or `None` above the cap.
fn all_replacements(s: &Sentence, positions: &[usize], dict: &SynonymDict) -> Option<Vec<Sentence>> {
    let mut size = 1usize;
    for &p in positions {
        size = size.saturating_mul(dict.lookup(&s.tokens()[p]).len());
    }
    if size > POOL_CAP {
        return None;
    }
    let mut out = vec![s.clone()];
    for &p in positions {
        let syns = dict.lookup(&s.tokens()[p]);
        out = out
            .into_iter()
            .flat_map(|base| {
                syns.iter().map(move |w| {
                    let mut c = base.clone();
                    c.tokens_mut()[p] = w.clone();
                    c
                })
            })
            .collect();
    }
    let mut seen = HashSet::new();
    out.retain(|c| seen.insert(c.clone()));
    Some(out)
}

/// Random-swap restoration: each text is reordered by `k` random swaps, then
/// `k` swaps are applied to try to undo it. Texts shorter than two tokens
/// are skipped.
pub fn rs_restoration<R: Rng + ?Sized>(
    texts: &[Sentence],
    k: usize,
    program: Program,
    model: Option<&NGramModel>,
    rng: &mut R,
) -> Result<Restoration> {
    check_k(k)?;
    let model = need_model(program, model)?;
    let seeds = text_seeds(texts.len(), rng);
    Ok(Restoration::tally(texts.par_iter().zip(&seeds).map(|(text, &(ps, ss))| {
        if text.len() < 2 {
            return None;
        }
        let mut prng = ChaCha8Rng::seed_from_u64(ps);
        let mut srng = ChaCha8Rng::seed_from_u64(ss);
        let perturbed = random_swap(text, k, &mut prng, true)?;
        Some(match (program, model) {
            (Program::Ng, Some(model)) => {
                let pool = all_swap_outcomes(&perturbed, k)
                    .unwrap_or_else(|| sampled_pool(|| random_swap(&perturbed, k, &mut srng, true)));
                argmax_is(text, &pool, model)
            }
            _ => random_swap(&perturbed, k, &mut srng, true).as_ref() == Some(text),
        })
    }).collect::<Vec<_>>()))
}

/// Distinct results of exactly `k` swaps, or `None` once they exceed the cap.
fn all_swap_outcomes(s: &Sentence, k: usize) -> Option<Vec<Sentence>> {
    let n = s.len();
    let mut frontier = vec![s.clone()];
    for _ in 0..k {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for base in &frontier {
            for i in 0..n {
                for j in i + 1..n {
                    let mut c = base.clone();
                    c.tokens_mut().swap(i, j);
                    if seen.insert(c.clone()) {
                        next.push(c);
                        if next.len() > POOL_CAP {
                            return None;
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    Some(frontier)
}

/// Random-deletion restoration: `k` words sampled from the text (with
/// replacement) are inserted at random positions, then `k` words are deleted.
pub fn rd_restoration<R: Rng + ?Sized>(
    texts: &[Sentence],
    k: usize,
    program: Program,
    model: Option<&NGramModel>,
    rng: &mut R,
) -> Result<Restoration> {
    check_k(k)?;
    let model = need_model(program, model)?;
    let seeds = text_seeds(texts.len(), rng);
    Ok(Restoration::tally(texts.par_iter().zip(&seeds).map(|(text, &(ps, ss))| {
        if text.is_empty() {
            return None;
        }
        let mut prng = ChaCha8Rng::seed_from_u64(ps);
        let mut srng = ChaCha8Rng::seed_from_u64(ss);
        let perturbed = insert_sampled_words(text, k, &mut prng);
        Some(match (program, model) {
            (Program::Ng, Some(model)) => {
                let pool = all_deletions(&perturbed, k)
                    .unwrap_or_else(|| sampled_pool(|| random_delete(&perturbed, k, &mut srng, true)));
                argmax_is(text, &pool, model)
            }
            _ => random_delete(&perturbed, k, &mut srng, true).as_ref() == Some(text),
        })
    }).collect::<Vec<_>>()))
}

fn insert_sampled_words<R: Rng + ?Sized>(s: &Sentence, k: usize, rng: &mut R) -> Sentence {
    let mut out = s.clone();
    for _ in 0..k {
        let word = s.tokens().choose(rng).expect("non-empty text").clone();
        let at = rng.random_range(0..=out.len());
        out.tokens_mut().insert(at, word);
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k.min(n - k)).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Distinct results of deleting `k` positions, or `None` above the cap.
fn all_deletions(s: &Sentence, k: usize) -> Option<Vec<Sentence>> {
    let n = s.len();
    if k >= n || binomial(n, k) > POOL_CAP {
        return None;
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let kept = s
            .tokens()
            .iter()
            .enumerate()
            .filter(|(i, _)| !combo.contains(i))
            .map(|(_, t)| t.clone())
            .collect();
        let c = Sentence::from_vec_unchecked(kept);
        if seen.insert(c.clone()) {
            out.push(c);
        }
        // next k-combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
            break;
        };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
    Some(out)
}

/// Share of the original's adjacent token pairs that survive in `aug`,
/// counted as a multiset.
pub fn bigram_overlap(orig: &Sentence, aug: &Sentence) -> Result<f64> {
    if orig.len() < 2 {
        return Err(Error::InvalidArgument("bigram overlap needs at least two tokens".into()));
    }
    let mut counts: HashMap<(&str, &str), usize> = HashMap::new();
    for w in orig.tokens().windows(2) {
        *counts.entry((&w[0], &w[1])).or_insert(0) += 1;
    }
    let mut shared = 0;
    for w in aug.tokens().windows(2) {
        if let Some(c) = counts.get_mut(&(w[0].as_str(), w[1].as_str())) {
            if *c > 0 {
                *c -= 1;
                shared += 1;
            }
        }
    }
    Ok(shared as f64 / (orig.len() - 1) as f64)
}

/// Levenshtein distance over tokens.
pub fn word_edit_distance(x: &Sentence, y: &Sentence) -> usize {
    let (x, y) = (x.tokens(), y.tokens());
    let mut prev: Vec<usize> = (0..=y.len()).collect();
    let mut cur = vec![0; y.len() + 1];
    for (i, xi) in x.iter().enumerate() {
        cur[0] = i + 1;
        for (j, yj) in y.iter().enumerate() {
            let sub = prev[j] + usize::from(xi != yj);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[y.len()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityConfig {
    pub sample_size: usize,
    pub repeats: usize,
    pub edits: Vec<usize>,
    /// Pool size for the double-swap overlap measurement.
    pub pool_size: usize,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            sample_size: 10_000,
            repeats: 5,
            edits: vec![1, 2, 3],
            pool_size: 20,
        }
    }
}

/// Mean accuracy of one (operation, edit count, program) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RestorationReport {
    pub op: EditKind,
    pub edits: usize,
    pub program: Program,
    pub trials: usize,
    pub accuracy: f64,
    pub per_trial: Vec<f64>,
}

/// Double-swap outputs compared against their source texts.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSummary {
    pub program: Program,
    pub texts: usize,
    pub mean_bigram_overlap: f64,
    pub mean_edit_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub cells: Vec<RestorationReport>,
    pub overlap: Vec<OverlapSummary>,
}

pub const RESTORATION_OPS: [EditKind; 3] = [EditKind::Sr, EditKind::Rs, EditKind::Rd];
const PROGRAMS: [Program; 2] = [Program::Reda, Program::Ng];

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Runs every restoration cell `repeats` times on fresh samples of
/// `sample_size` texts, then measures bigram overlap and edit distance of
/// double-swap augmentations picked by each program.
pub fn run_quality_suite<R: Rng + ?Sized>(
    corpus: &[Sentence],
    model: &NGramModel,
    pdict: &SynonymDict,
    cfg: &QualityConfig,
    rng: &mut R,
) -> Result<QualityReport> {
    if cfg.repeats == 0 {
        return Err(Error::Evaluation("repeats must be positive".into()));
    }
    if cfg.sample_size == 0 || corpus.len() < cfg.sample_size {
        return Err(Error::Evaluation(format!(
            "corpus has {} texts, sample size is {}",
            corpus.len(),
            cfg.sample_size
        )));
    }
    if cfg.edits.is_empty() || cfg.edits.contains(&0) {
        return Err(Error::Evaluation("edit counts must be positive".into()));
    }

    let mut acc: HashMap<(EditKind, usize, Program), Vec<f64>> = HashMap::new();
    let mut overlaps: HashMap<Program, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for _ in 0..cfg.repeats {
        let sample: Vec<Sentence> = index::sample(rng, corpus.len(), cfg.sample_size)
            .into_iter()
            .map(|i| corpus[i].clone())
            .collect();
        for op in RESTORATION_OPS {
            for &k in &cfg.edits {
                let cell_seed = rng.next_u64();
                for program in PROGRAMS {
                    let mut cell_rng = ChaCha8Rng::seed_from_u64(cell_seed);
                    let r = match op {
                        EditKind::Sr => sr_restoration(&sample, pdict, k, program, Some(model), &mut cell_rng)?,
                        EditKind::Rs => rs_restoration(&sample, k, program, Some(model), &mut cell_rng)?,
                        _ => rd_restoration(&sample, k, program, Some(model), &mut cell_rng)?,
                    };
                    acc.entry((op, k, program)).or_default().push(r.accuracy());
                }
            }
        }
        let seeds = text_seeds(sample.len(), rng);
        let picks: Vec<_> = sample
            .par_iter()
            .zip(&seeds)
            .filter_map(|(text, &(seed, _))| double_swap_picks(text, cfg.pool_size, model, seed))
            .collect();
        for (text, reda, ng) in picks {
            for (program, pick) in [(Program::Reda, reda), (Program::Ng, ng)] {
                let entry = overlaps.entry(program).or_default();
                entry.0.push(bigram_overlap(&text, &pick)?);
                entry.1.push(word_edit_distance(&text, &pick) as f64);
            }
        }
    }

    let mut cells = Vec::new();
    for op in RESTORATION_OPS {
        for program in PROGRAMS {
            for &k in &cfg.edits {
                let per_trial = acc.remove(&(op, k, program)).unwrap_or_default();
                cells.push(RestorationReport {
                    op,
                    edits: k,
                    program,
                    trials: per_trial.len(),
                    accuracy: mean(&per_trial),
                    per_trial,
                });
            }
        }
    }
    let overlap = PROGRAMS
        .into_iter()
        .map(|program| {
            let (ov, ed) = overlaps.remove(&program).unwrap_or_default();
            OverlapSummary {
                program,
                texts: ov.len(),
                mean_bigram_overlap: if ov.is_empty() { 0.0 } else { mean(&ov) },
                mean_edit_distance: if ed.is_empty() { 0.0 } else { mean(&ed) },
            }
        })
        .collect();
    Ok(QualityReport { cells, overlap })
}

/// One random and one best-scoring pick from a pool of two-swap outputs.
fn double_swap_picks(
    text: &Sentence,
    pool_size: usize,
    model: &NGramModel,
    seed: u64,
) -> Option<(Sentence, Sentence, Sentence)> {
    if text.len() < 2 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op = EditOp::new(EditKind::Rs, 2).expect("valid op");
    let pool = collect_pool(text, op, pool_size, &SynonymDict::new(), &mut rng);
    let reda = pool.candidates.choose(&mut rng)?.clone();
    let ng = rank_by_score(&pool.candidates, model).into_iter().next()?.sentence;
    Some((text.clone(), reda, ng))
}

impl QualityReport {
    pub fn cell(&self, op: EditKind, edits: usize, program: Program) -> Option<&RestorationReport> {
        self.cells
            .iter()
            .find(|c| c.op == op && c.edits == edits && c.program == program)
    }

    pub fn overlap(&self, program: Program) -> Option<&OverlapSummary> {
        self.overlap.iter().find(|o| o.program == program)
    }

    /// One row per measurement: accuracy cells, then the double-swap metrics.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\top\tprogram\tedits\tmean\tper_repeat\n");
        for c in &self.cells {
            let per: Vec<String> = c.per_trial.iter().map(|a| format!("{a:.6}")).collect();
            let _ = writeln!(
                out,
                "accuracy\t{}\t{}\t{}\t{:.6}\t{}",
                c.op,
                c.program,
                c.edits,
                c.accuracy,
                per.join(",")
            );
        }
        for o in &self.overlap {
            let _ = writeln!(out, "bigram_overlap\tRS\t{}\t2\t{:.6}\t", o.program, o.mean_bigram_overlap);
            let _ = writeln!(out, "edit_distance\tRS\t{}\t2\t{:.6}\t", o.program, o.mean_edit_distance);
        }
        out
    }

    /// Accuracy grid with one column per edit count, followed by the
    /// double-swap summary.
    pub fn to_table(&self) -> String {
        let mut edits: Vec<usize> = self.cells.iter().map(|c| c.edits).collect();
        edits.sort_unstable();
        edits.dedup();
        let mut out = String::new();
        let _ = write!(out, "{:<4}{:<7}", "op", "prog");
        for k in &edits {
            let _ = write!(out, "{:>10}", format!("k={k}"));
        }
        out.push('\n');
        for op in RESTORATION_OPS {
            for program in PROGRAMS {
                let _ = write!(out, "{:<4}{:<7}", op.as_str(), program.as_str());
                for &k in &edits {
                    match self.cell(op, k, program) {
                        Some(c) => {
                            let _ = write!(out, "{:>9.1}%", c.accuracy * 100.0);
                        }
                        None => {
                            let _ = write!(out, "{:>10}", "-");
                        }
                    }
                }
                out.push('\n');
            }
        }
        out.push('\n');
        let _ = writeln!(out, "double swap  {:>8}{:>15}{:>15}", "texts", "bigram overlap", "edit distance");
        for o in &self.overlap {
            let _ = writeln!(
                out,
                "{:<13}{:>8}{:>15.3}{:>15.3}",
                o.program.as_str(),
                o.texts,
                o.mean_bigram_overlap,
                o.mean_edit_distance
            );
        }
        out
    }
}
