//! Synthetic corpora with strong collocations, for tests and benchmarks.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::index;
use rand::Rng;

use crate::tokenizer::Sentence;

/// Lines drawn from a fixed set of phrase templates, so the same word
/// sequences recur many times. About one line in ten has a single word
/// replaced by a random vocabulary word.
pub fn collocation_corpus<R: Rng + ?Sized>(lines: usize, rng: &mut R) -> Vec<Sentence> {
    const VOCAB: usize = 160;
    const TEMPLATES: usize = 60;

    let vocab: Vec<String> = (0..VOCAB).map(|i| format!("w{i:03}")).collect();
    let templates: Vec<Vec<String>> = (0..TEMPLATES)
        .map(|_| {
            let len = rng.random_range(6..=9);
            index::sample(rng, VOCAB, len)
                .into_iter()
                .map(|i| vocab[i].clone())
                .collect()
        })
        .collect();
    // Zipf-like template popularity.
    let weights: Vec<f64> = (1..=TEMPLATES).map(|r| 1.0 / (r as f64).sqrt()).collect();
    let pick = WeightedIndex::new(&weights).expect("positive weights");

    (0..lines)
        .map(|_| {
            let mut line = templates[pick.sample(rng)].clone();
            if rng.random_bool(0.1) {
                let at = rng.random_range(0..line.len());
                line[at] = vocab[rng.random_range(0..VOCAB)].clone();
            }
            Sentence::from_vec_unchecked(line)
        })
        .collect()
}

/// Sentences of `len` pairwise distinct tokens.
pub fn distinct_token_texts<R: Rng + ?Sized>(count: usize, len: usize, rng: &mut R) -> Vec<Sentence> {
    (0..count)
        .map(|_| {
            Sentence::from_vec_unchecked(
                index::sample(rng, 1000, len)
                    .into_iter()
                    .map(|i| format!("d{i:03}"))
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn corpus_shape() {
        let c = collocation_corpus(500, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(c.len(), 500);
        assert!(c.iter().all(|s| (6..=9).contains(&s.len())));
        let distinct: HashSet<_> = c.iter().collect();
        assert!(distinct.len() < 200, "templates should repeat");
        assert_eq!(c, collocation_corpus(500, &mut ChaCha8Rng::seed_from_u64(1)));
    }

    #[test]
    fn distinct_tokens() {
        for s in distinct_token_texts(20, 7, &mut ChaCha8Rng::seed_from_u64(2)) {
            let set: HashSet<_> = s.tokens().iter().collect();
            assert_eq!(set.len(), 7);
        }
    }
}
